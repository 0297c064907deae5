fn main() {
    std::process::exit(haar_concentration_cli::run(std::env::args_os()));
}
