fn main() {
    std::process::exit(timeavg_cli::run_cli(std::env::args_os()));
}
