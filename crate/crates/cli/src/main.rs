fn main() {
    std::process::exit(evfield_cli::run_command(std::env::args()));
}
