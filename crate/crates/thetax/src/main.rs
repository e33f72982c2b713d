fn main() {
    std::process::exit(thetax::cli::run(std::env::args_os()));
}
