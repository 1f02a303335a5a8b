fn main() {
    std::process::exit(robscreen::cli::run(std::env::args_os()));
}
