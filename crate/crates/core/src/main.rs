fn main() {
    std::process::exit(lyaplab::cli::execute(std::env::args_os()));
}
