fn main() {
    std::process::exit(bbgky_cli::app::main());
}
