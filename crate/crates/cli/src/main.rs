use clap::Parser;

use nulledit_cli::commands::{run, Cli};
use nulledit_cli::EXIT_ERROR;

fn main() {
    // Usage errors keep clap's human-readable rendering but exit 1, so that
    // exit code 2 always means "ran, but skipped infeasible targets".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("{}", err.to_json());
            std::process::exit(EXIT_ERROR);
        }
    }
}
