fn main() {
    std::process::exit(warmglove::cli::run(std::env::args_os()));
}
