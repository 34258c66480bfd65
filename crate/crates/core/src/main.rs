fn main() {
    std::process::exit(polyvar::cli::run(std::env::args_os()));
}
