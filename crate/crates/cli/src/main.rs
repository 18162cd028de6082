use clap::Parser;
use gec_combine_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("gec-combine: {e}");
        std::process::exit(e.exit_code());
    }
}
