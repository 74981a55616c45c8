use clap::Parser;
use polymul_cli::{run, Cli};

fn main() {
    let cli = Cli::parse(); // usage errors exit with code 2
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &mut stdout) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            std::process::exit(2);
        }
    }
}
