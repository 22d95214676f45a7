fn main() {
    std::process::exit(voxfuse::cli::run(std::env::args_os()));
}
