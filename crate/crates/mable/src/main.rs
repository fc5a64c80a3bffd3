fn main() {
    std::process::exit(mable::cli::run(std::env::args_os()));
}
