fn main() {
    std::process::exit(conecert_cli::run(std::env::args_os()));
}
