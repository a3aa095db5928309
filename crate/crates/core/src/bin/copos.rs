fn main() {
    std::process::exit(copos::cli::run(std::env::args_os()));
}
