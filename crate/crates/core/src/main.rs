fn main() {
    std::process::exit(qdeq::cli::run(std::env::args_os()));
}
