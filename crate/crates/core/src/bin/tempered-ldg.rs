fn main() {
    std::process::exit(tempered_ldg::cli::main_with_args(std::env::args_os()));
}
