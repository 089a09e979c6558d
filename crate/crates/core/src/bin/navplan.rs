fn main() {
    navplan::cli::init_logging();
    std::process::exit(navplan::cli::main_with_args(std::env::args_os()));
}
