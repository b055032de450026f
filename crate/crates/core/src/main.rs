use clap::Parser;

fn main() {
    let cli = orbitvol::cli::Cli::parse();
    std::process::exit(orbitvol::cli::run(&cli));
}
