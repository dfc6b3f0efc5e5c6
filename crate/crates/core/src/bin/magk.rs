fn main() {
    std::process::exit(magk::cli::main_with_args(std::env::args_os()));
}
