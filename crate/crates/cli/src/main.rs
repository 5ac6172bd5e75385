use clap::Parser;

fn main() {
    let cli = qbdq_cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = qbdq_cli::run(cli, &mut stdout);
    std::process::exit(code);
}
