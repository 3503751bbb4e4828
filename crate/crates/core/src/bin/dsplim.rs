fn main() {
    std::process::exit(dsplim::cli::run(std::env::args_os()));
}
