use std::process::exit;

fn main() {
    exit(sigpact_cli::run(std::env::args()));
}
