use clap::Parser;

use hetnet_coverage::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
