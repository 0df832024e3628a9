fn main() {
    std::process::exit(drauc::cli::run_command(std::env::args_os()));
}
