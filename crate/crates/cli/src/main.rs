use clap::Parser;
use holo_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli, &mut out);
    print!("{out}");
    if let Err(e) = result {
        eprintln!("holo: {}", e.message);
        std::process::exit(e.code);
    }
}
