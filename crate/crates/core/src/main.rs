use std::process::ExitCode;

fn main() -> ExitCode {
    phasegate::cli::run()
}
