fn main() {
    std::process::exit(tenrec_cli::main_with_args(std::env::args_os()));
}
