fn main() {
    std::process::exit(mdlb::cli::run(std::env::args_os()));
}
