fn main() {
    std::process::exit(semsketch::cli::run(std::env::args_os()));
}
