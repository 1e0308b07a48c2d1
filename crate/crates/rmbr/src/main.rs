fn main() {
    std::process::exit(rmbr::cli::run(std::env::args_os()));
}
