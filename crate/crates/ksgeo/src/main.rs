use clap::Parser;
use ksgeo::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    if let Err(err) = cli::run(&args) {
        eprintln!("error: {err}");
        std::process::exit(err.exit.code());
    }
}
