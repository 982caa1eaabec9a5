fn main() {
    std::process::exit(spinnet_cli::main_with_args(std::env::args_os()));
}
