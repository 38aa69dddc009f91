fn main() {
    std::process::exit(cavity_mems::cli::main_with_args(std::env::args_os()));
}
