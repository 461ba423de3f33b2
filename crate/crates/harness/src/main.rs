fn main() {
    std::process::exit(chfsim::cli::run(std::env::args_os()));
}
