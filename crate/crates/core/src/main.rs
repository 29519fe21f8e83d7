fn main() {
    std::process::exit(bechain::cli::run_from_args(std::env::args_os()));
}
