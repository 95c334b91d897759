use std::process::ExitCode;

fn main() -> ExitCode {
    kuramoto_ring::cli::run()
}
