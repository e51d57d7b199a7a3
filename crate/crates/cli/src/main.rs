use clap::Parser;

fn main() {
    let cli = evostack_cli::Cli::parse();
    if let Err(e) = evostack_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(evostack_cli::exit_code(&e));
    }
}
