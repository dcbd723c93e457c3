fn main() {
    std::process::exit(opengrid_cli::run(std::env::args_os()));
}
