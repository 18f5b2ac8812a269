fn main() {
    std::process::exit(lowmach::cli::run(std::env::args_os()));
}
