fn main() {
    std::process::exit(fracdim::cli::run(std::env::args_os()));
}
