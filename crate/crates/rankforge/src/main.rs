use std::process::ExitCode;

fn main() -> ExitCode {
    rankforge::cli::run()
}
