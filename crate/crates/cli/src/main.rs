use std::process::ExitCode;

fn main() -> ExitCode {
    controversy_cli::run(std::env::args_os())
}
