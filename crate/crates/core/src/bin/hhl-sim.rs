fn main() {
    std::process::exit(hhl_sim::cli::run_from(std::env::args_os()));
}
