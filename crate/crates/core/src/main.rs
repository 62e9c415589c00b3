fn main() {
    std::process::exit(credence_audit::cli::main_with_args(std::env::args_os()));
}
