use clap::Parser;

fn main() {
    let cli = jetcartan_cli::Cli::parse();
    std::process::exit(jetcartan_cli::run(&cli));
}
