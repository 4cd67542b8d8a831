fn main() {
    std::process::exit(objshell::cli::main_with_args(std::env::args_os()));
}
