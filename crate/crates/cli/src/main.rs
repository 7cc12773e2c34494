fn main() {
    std::process::exit(geoprox_cli::main_with_args(std::env::args_os()));
}
