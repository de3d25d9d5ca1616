fn main() {
    std::process::exit(uebk::cli::run(std::env::args_os()));
}
