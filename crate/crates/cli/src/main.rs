fn main() {
    std::process::exit(effham_cli::run(std::env::args_os()));
}
