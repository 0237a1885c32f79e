fn main() {
    std::process::exit(fsi_cli::main_with(std::env::args_os()));
}
