use std::process::ExitCode;

use clap::Parser;
use fracmc::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.run() {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.outcome.summary).expect("json values serialize"));
            for path in &report.written {
                eprintln!("wrote {}", path.display());
            }
            eprintln!("wrote {}", report.manifest.display());
            let failed = report.outcome.failed_checks();
            for c in &report.outcome.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
