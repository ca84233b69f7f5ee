use std::process::ExitCode;

fn main() -> ExitCode {
    anholonomic::cli::main()
}
