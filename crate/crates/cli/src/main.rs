fn main() {
    std::process::exit(dialectometry_cli::run(std::env::args_os()));
}
