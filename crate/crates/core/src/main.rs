fn main() {
    std::process::exit(pdshare::cli::run_from(std::env::args_os()));
}
