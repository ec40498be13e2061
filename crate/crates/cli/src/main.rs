fn main() {
    std::process::exit(qaoa_gmvp_cli::run(std::env::args_os()));
}
