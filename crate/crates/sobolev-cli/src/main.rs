fn main() {
    std::process::exit(sobolev_cli::run_command(std::env::args_os()));
}
