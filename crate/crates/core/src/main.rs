fn main() {
    std::process::exit(ctrlplace::cli::main_with_args(std::env::args_os()));
}
