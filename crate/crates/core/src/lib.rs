//! GloVe word embeddings with Mittens retrofitting toward prior vectors.
//!
//! The pipeline runs text → [`corpus`] tokens and vocabulary →
//! [`cooccur`] counts → [`trainer`] (full-batch AdaGrad on the [`objective`])
//! → [`embedding_io`] files. [`analysis`] sweeps the retrofitting weight on
//! simulated data, [`bench`] times the vectorized step against a per-pair
//! loop, and [`featurize`] turns documents into summed word vectors.

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod cooccur;
pub mod corpus;
pub mod embedding_io;
pub mod error;
pub mod featurize;
pub mod objective;
pub mod trainer;

pub use cooccur::{build_cooccurrence, CooccurrenceMatrix};
pub use corpus::{build_vocabulary, tokenize, TokenizerConfig, Vocabulary};
pub use embedding_io::{read_embeddings, resolve_priors, write_embeddings, EmbeddingFile};
pub use error::{Error, Result};
pub use objective::{HyperParams, ModelParams, PriorEmbeddings};
pub use trainer::{compose_embeddings, train, train_with, TrainOptions, Trained};
