fn main() {
    std::process::exit(fppdt_cli::run(std::env::args_os()));
}
