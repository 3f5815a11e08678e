fn main() {
    std::process::exit(pqovs::cli::main_with_args(std::env::args_os()));
}
