use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gasvm::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_secs()
        .init();

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = execute(cli, &mut out);
    let _ = out.flush();
    match status {
        Ok(s) => ExitCode::from(s.exit_code()),
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
