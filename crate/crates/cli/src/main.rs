use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

use dirac_core::harness::{error_json, run_path, verify_suite, Fault, VerifyOptions};
use dirac_core::spectral_core::checkpoint::Checkpoint;
use dirac_core::spectral_core::{sobolev_norm, SpinorField};
use dirac_core::Error;

#[derive(Parser)]
#[command(name = "dirac", version, about = "2D massless Dirac simulator and probe suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run { config: PathBuf },
    /// Run the self-verification suite.
    Verify {
        /// Deliberately break one component (projection-sign).
        #[arg(long, value_name = "FAULT")]
        inject_fault: Option<Fault>,
        /// Print the summary as JSON instead of text lines.
        #[arg(long)]
        json: bool,
    },
    /// Print the header and norms of a field checkpoint.
    Inspect { checkpoint: PathBuf },
}

fn fail(e: &Error) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&error_json(e)).unwrap_or_default());
    match e {
        Error::Validation(_) => ExitCode::from(2),
        _ => ExitCode::FAILURE,
    }
}

fn inspect(path: &PathBuf) -> Result<serde_json::Value, Error> {
    let ck = Checkpoint::read(path)?;
    let mut v = json!({
        "n": ck.grid.n(),
        "box_length": ck.grid.box_length(),
        "representation": format!("{:?}", ck.repr).to_lowercase(),
        "components": ck.components.len(),
        "component_l2_norms": ck.component_norms(),
    });
    if ck.components.len() == 2 {
        let f: SpinorField = ck.into_field()?;
        v["charge"] = json!(f.l2_norm().powi(2));
        v["H1_norm"] = json!(sobolev_norm(&f, 1.0, false)?);
        v["finite"] = json!(f.is_finite());
    }
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run_path(&config) {
            Ok(out) => {
                for f in &out.files {
                    eprintln!("wrote {}", f.display());
                }
                println!("{}", serde_json::to_string_pretty(&out.summary["results"]).unwrap_or_default());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Verify { inject_fault, json } => {
            let opts = VerifyOptions { inject_fault };
            let summary = verify_suite(&opts, |g| {
                if !json {
                    eprintln!("[{}] done in {:.2} s", g.name, g.seconds);
                }
            });
            if json {
                println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            } else {
                for line in summary.lines() {
                    println!("{line}");
                }
            }
            if summary.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Inspect { checkpoint } => match inspect(&checkpoint) {
            Ok(v) => {
                println!("{}", serde_json::to_string_pretty(&v).unwrap_or_default());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
