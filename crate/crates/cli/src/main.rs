fn main() {
    std::process::exit(coalition_cli::dispatch(std::env::args_os()));
}
