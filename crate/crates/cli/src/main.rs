use std::io::Write;

use clap::Parser;
use ptpu_cli::config::{resolve, Cli};
use ptpu_cli::execute;
use ptpu_cli::output::report_file_name;

fn main() {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| execute(&cli.command, &cfg).map(|o| (o, cfg)));
    match result {
        Ok((outcome, cfg)) => {
            // A closed stdout (e.g. piped into `head`) must not turn a
            // finished run into a panic; the report is already on disk.
            let mut out = std::io::stdout().lock();
            for line in &outcome.lines {
                let _ = writeln!(out, "{line}");
            }
            let status = if outcome.report.pass { "ok" } else { "verification failed" };
            let path = cfg.out_dir.join(report_file_name(&cfg.command));
            let _ = writeln!(out, "{status}; report written to {}", path.display());
            drop(out);
            std::process::exit(outcome.exit_code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
