fn main() {
    std::process::exit(lpd_lasso::cli::main_with_args(std::env::args_os()));
}
