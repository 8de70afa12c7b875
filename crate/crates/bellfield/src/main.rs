fn main() {
    std::process::exit(bellfield::cli::run(std::env::args_os()));
}
