use clap::Parser;

fn main() {
    let cli = ramsey_cli::Cli::parse();
    std::process::exit(ramsey_cli::run(cli));
}
