use std::process::ExitCode;

fn main() -> ExitCode {
    qpu_twin::cli::run()
}
