use clap::Parser;
use esqnn_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = esqnn_cli::run(&cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
