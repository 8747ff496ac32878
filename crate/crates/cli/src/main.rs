fn main() {
    std::process::exit(eitline_cli::run(std::env::args_os()));
}
