use std::process::ExitCode;

fn main() -> ExitCode {
    ldc::cli::main_with(std::env::args())
}
