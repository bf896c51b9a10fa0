fn main() {
    std::process::exit(dbrlab::cli::main_with_args(std::env::args_os()));
}
