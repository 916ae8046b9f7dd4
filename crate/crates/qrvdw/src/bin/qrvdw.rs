fn main() {
    std::process::exit(qrvdw::cli::run(std::env::args_os()));
}
