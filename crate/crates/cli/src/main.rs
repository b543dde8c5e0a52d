use clap::Parser;

fn main() {
    let cli = bce_cli::Cli::parse();
    std::process::exit(bce_cli::execute(&cli));
}
