fn main() {
    std::process::exit(adasense::cli::main_with_args(std::env::args_os()));
}
