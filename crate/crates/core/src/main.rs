fn main() {
    std::process::exit(pinsync::cli::run(std::env::args_os()));
}
