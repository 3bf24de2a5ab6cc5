use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(composite_bosons::cli::run(std::env::args_os()))
}
