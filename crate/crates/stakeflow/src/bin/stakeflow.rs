fn main() {
    std::process::exit(stakeflow::cli::main_with_args(std::env::args_os()));
}
