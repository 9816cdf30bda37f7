fn main() {
    std::process::exit(robreg::cli::run_cli(std::env::args_os()));
}
