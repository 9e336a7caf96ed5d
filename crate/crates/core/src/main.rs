fn main() {
    std::process::exit(mpshl::cli::run(std::env::args_os()));
}
