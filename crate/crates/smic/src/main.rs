use clap::Parser;

fn main() {
    let cli = smic::cli::Cli::parse();
    smic::cli::init_threads_from_env();
    if let Err(err) = smic::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
