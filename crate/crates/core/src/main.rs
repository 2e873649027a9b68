fn main() {
    std::process::exit(kinetic_blocking::cli::run_cli(std::env::args_os()));
}
