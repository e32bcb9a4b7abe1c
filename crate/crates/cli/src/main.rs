use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::F0(a) => commands::f0(a),
        Command::Segment(a) => commands::segment(a),
        Command::Extract(a) => commands::extract(a),
        Command::Pvi(a) => commands::pvi(a),
        Command::Stats(a) => commands::stats(a),
        Command::AgeCorrect(a) => commands::age_correct_cmd(a),
        Command::Classify(a) => commands::classify(a),
        Command::Search(a) => commands::search(a),
        Command::Cohort(a) => commands::cohort(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors and 0 for --help/--version
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
