fn main() {
    std::process::exit(ntpm_cli::run_cli(std::env::args_os()));
}
