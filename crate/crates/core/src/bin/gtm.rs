fn main() {
    std::process::exit(threshold_influence::cli::main_with_args(std::env::args_os()));
}
