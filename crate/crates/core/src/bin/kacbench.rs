fn main() {
    std::process::exit(kacbench::cli::main_with_args(std::env::args_os()));
}
