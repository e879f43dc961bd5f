fn main() {
    std::process::exit(softgait::cli::main_with_args(std::env::args_os()));
}
