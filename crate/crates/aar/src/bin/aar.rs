fn main() {
    std::process::exit(aar::cli::main_with_args(std::env::args_os()));
}
