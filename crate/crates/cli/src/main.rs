use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(muband_tool::app::main_with(std::env::args_os()) as u8)
}
