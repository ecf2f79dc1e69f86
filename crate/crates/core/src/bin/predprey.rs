fn main() {
    std::process::exit(predprey::cli::run_cli(std::env::args_os()));
}
