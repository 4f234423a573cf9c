fn main() {
    std::process::exit(heavyclip::harness::cli::main_with(std::env::args_os()));
}
