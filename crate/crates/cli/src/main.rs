fn main() {
    std::process::exit(lpflow_cli::run(std::env::args_os()));
}
