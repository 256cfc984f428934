use clap::Parser;
use irwin::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
