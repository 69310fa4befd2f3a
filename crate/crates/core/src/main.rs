use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(chanbench::cli::run(std::env::args()) as u8)
}
