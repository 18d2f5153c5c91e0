fn main() {
    std::process::exit(maxent_graphs::cli::dispatch(std::env::args_os()));
}
