fn main() {
    std::process::exit(tremor_id::cli::run_command(std::env::args_os()));
}
