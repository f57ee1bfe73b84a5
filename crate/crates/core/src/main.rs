use clap::Parser;

fn main() {
    let cli = geoconc::cli::Cli::parse();
    std::process::exit(geoconc::cli::run(cli));
}
