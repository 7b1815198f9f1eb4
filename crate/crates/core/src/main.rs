fn main() {
    std::process::exit(cofine::cli::run(std::env::args_os()));
}
