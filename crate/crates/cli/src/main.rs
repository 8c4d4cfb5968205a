fn main() {
    std::process::exit(hashqkd_cli::main_with_args(std::env::args_os()));
}
