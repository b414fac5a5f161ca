fn main() {
    std::process::exit(rtf_cli::run_command(std::env::args_os()));
}
