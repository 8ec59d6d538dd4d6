fn main() {
    std::process::exit(bsmip::cli::main_with_args(std::env::args_os()));
}
