fn main() {
    std::process::exit(stieltjes_kit::cli::run(std::env::args_os()));
}
