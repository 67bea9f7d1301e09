fn main() {
    std::process::exit(iverson::cli::main_with_args(std::env::args_os()));
}
