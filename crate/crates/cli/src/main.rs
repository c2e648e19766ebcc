fn main() {
    std::process::exit(vscav_cli::run(std::env::args_os()));
}
