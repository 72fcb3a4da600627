fn main() {
    std::process::exit(metashap::cli::run(std::env::args_os()));
}
