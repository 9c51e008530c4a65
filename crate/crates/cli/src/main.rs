fn main() {
    std::process::exit(fading_ic_cli::run(std::env::args_os().collect()));
}
