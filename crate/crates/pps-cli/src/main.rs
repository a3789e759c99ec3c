fn main() {
    std::process::exit(pps_cli::cli::run_cli(std::env::args_os()));
}
