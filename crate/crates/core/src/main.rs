use clap::error::ErrorKind;
use clap::Parser;

use qcorr::cli::{self, CliArgs};

fn main() {
    let args = match CliArgs::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => cli::EXIT_OK,
                _ => cli::EXIT_CONFIG,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(cli::main_with_args(&args));
}
