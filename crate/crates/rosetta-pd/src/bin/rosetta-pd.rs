fn main() {
    std::process::exit(rosetta_pd::cli::run(std::env::args_os()));
}
