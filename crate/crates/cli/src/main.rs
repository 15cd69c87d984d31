fn main() {
    std::process::exit(drift_cli::run(std::env::args_os()));
}
