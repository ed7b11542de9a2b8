fn main() {
    std::process::exit(nled::cli::run_cli(std::env::args_os()));
}
