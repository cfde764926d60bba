use clap::Parser;
use genkf::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    match cli::thread_cap() {
        Ok(Some(k)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                eprintln!("error: cannot build thread pool: {e}");
                std::process::exit(cli::EXIT_INPUT);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(cli::EXIT_INPUT);
        }
    }
    std::process::exit(cli::run(&cli));
}
