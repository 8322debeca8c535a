fn main() {
    std::process::exit(ldpid::cli::run(std::env::args_os()));
}
