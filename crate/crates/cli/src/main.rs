use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pbh_cli::run(std::env::args_os()) as u8)
}
