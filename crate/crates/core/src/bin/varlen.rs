fn main() {
    std::process::exit(varlen_spectrum::cli::main_with_args(std::env::args_os()));
}
