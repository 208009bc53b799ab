fn main() {
    std::process::exit(betachart::cli::main_with_args(std::env::args_os()));
}
