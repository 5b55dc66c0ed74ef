fn main() {
    std::process::exit(semev_cli::run_cli(std::env::args_os()));
}
