fn main() {
    std::process::exit(surfcheck::cli::run(std::env::args_os()));
}
