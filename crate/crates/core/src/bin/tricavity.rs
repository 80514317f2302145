fn main() {
    std::process::exit(tricavity::cli::main_with_args(std::env::args_os()));
}
