fn main() {
    std::process::exit(motlab::cli::run(std::env::args_os()));
}
