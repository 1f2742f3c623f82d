use clap::Parser;
use fieldnoise_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = fieldnoise_cli::run(cli) {
        eprintln!("fieldnoise: {e}");
        std::process::exit(e.exit_code());
    }
}
