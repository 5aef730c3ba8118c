fn main() {
    std::process::exit(czspace::cli::run(std::env::args_os()));
}
