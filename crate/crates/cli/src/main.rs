use std::process::ExitCode;

fn main() -> ExitCode {
    fisher_dirichlet_cli::main_with(std::env::args_os())
}
