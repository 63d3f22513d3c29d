fn main() {
    std::process::exit(h1cutoff::harness::run_cli(std::env::args_os()));
}
