use clap::Parser;
use stabflow_cli::cli::Cli;

fn main() {
    let cli = Cli::parse();
    if cli.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = stabflow_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
