fn main() {
    std::process::exit(ajd_cli::run(std::env::args_os()));
}
