use clap::Parser;

use wavereg::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("wavereg: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}
