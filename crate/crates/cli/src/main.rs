use clap::Parser;

fn main() {
    let cli = wstar_geom_cli::Cli::parse();
    std::process::exit(wstar_geom_cli::run(cli));
}
