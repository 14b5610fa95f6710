use clap::Parser;

fn main() {
    let cli = cslqp_cli::Cli::parse();
    std::process::exit(cslqp_cli::run(&cli));
}
