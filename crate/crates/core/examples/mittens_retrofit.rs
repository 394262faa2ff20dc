//! Retrofit a small corpus toward pretrained vectors and compare with GloVe.
//!
//! Words that have a prior are pulled toward it; the rest are learned from
//! the counts alone.
//!
//! cargo run --example mittens_retrofit

use warmglove::analysis::distance_to_priors;
use warmglove::{
    build_cooccurrence, build_vocabulary, resolve_priors, tokenize, train_with, EmbeddingFile, HyperParams,
    TokenizerConfig, TrainOptions,
};

const CORPUS: &str = "\
the patient reported chest pain and shortness of breath
chest pain radiating to the left arm
the patient denied fever and chills
shortness of breath on exertion with mild chest pain
fever and chills resolved after treatment
the patient was discharged after treatment";

const PRETRAINED: &str = "\
the 0.1 0.0 0.1 0.0
and 0.0 0.1 0.0 0.1
pain 0.6 -0.2 0.3 0.1
fever -0.3 0.5 0.2 0.0
chest 0.5 -0.1 0.4 0.0
breath 0.2 0.3 -0.4 0.2
zebra 1.0 1.0 1.0 1.0";

fn main() -> warmglove::Result<()> {
    let cfg = TokenizerConfig::default();
    let docs: Vec<Vec<String>> = CORPUS.lines().map(|l| tokenize(l, &cfg)).collect();
    let vocab = build_vocabulary(docs.iter().flatten(), 1)?;
    let x = build_cooccurrence(&docs, &vocab, 5)?;

    let pretrained = EmbeddingFile::read(PRETRAINED.as_bytes())?;
    let priors = resolve_priors(&pretrained, &vocab, 4)?;
    let anchored: Vec<&str> = priors.anchors().iter().map(|&i| vocab.token(i).unwrap()).collect();
    println!("{} words, {} with priors: {anchored:?}", vocab.len(), priors.len());

    for (label, mu, at_priors) in [("glove", 0.0, false), ("mittens", 0.1, false), ("mittens, prior start", 0.1, true)] {
        let hp = HyperParams {
            dim: 4,
            mu,
            epochs: 2000,
            ..HyperParams::default()
        };
        let opts = TrainOptions {
            init_at_priors: at_priors,
            ..TrainOptions::default()
        };
        let out = train_with(&x, &hp, Some(&priors), &opts)?;
        let d = distance_to_priors(&out.params, &priors, None)?;
        println!(
            "{label:<22} mu={mu:<4} final cost {:>8.4}  mean distance to priors {:.4}",
            out.report.final_cost().unwrap(),
            d.mean_with_prior.unwrap()
        );
    }
    Ok(())
}
