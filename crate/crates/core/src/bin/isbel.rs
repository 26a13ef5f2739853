use clap::Parser;

fn main() {
    let cli = isbel::cli::Cli::parse();
    std::process::exit(isbel::cli::run(&cli));
}
