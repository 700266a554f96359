fn main() {
    std::process::exit(egalitarian::cli::run(std::env::args_os()));
}
