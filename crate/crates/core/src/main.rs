fn main() {
    std::process::exit(alsvre::cli::run_cli(std::env::args_os()));
}
