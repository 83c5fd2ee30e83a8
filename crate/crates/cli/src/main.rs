use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use sedan_core::datadef::Distribution;
use sedan_core::session::{process_file, SessionOptions, SessionOutcome};
use sedan_core::testgen::TestMode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Random,
    Exhaustive,
    Mixed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dist {
    Geometric,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
    Both,
}

/// Check conjectures by random testing and a small waterfall prover.
#[derive(Debug, Parser)]
#[command(name = "sedan", version)]
struct Args {
    /// Source files; each runs in a fresh world.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Random seed (24 when neither this nor SEDAN_SEED is given).
    #[arg(long, env = "SEDAN_SEED")]
    seed: Option<u64>,
    /// Trials per test, overriding set-testing.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    /// Discard generalizations that testing refutes.
    #[arg(long, value_enum, default_value = "on")]
    backtrack: Switch,
    #[arg(long, value_name = "N")]
    max_rewrite_depth: Option<usize>,
    /// Where to write the structured report (stdout when absent).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    /// Use the same seed for every test of a form (default: on for thm,
    /// off for test?).
    #[arg(long, value_enum)]
    deterministic: Option<Switch>,
}

impl Args {
    fn options(&self) -> SessionOptions {
        SessionOptions {
            seed: self.seed,
            trials: self.trials,
            mode: self.mode.map(|m| match m {
                Mode::Random => TestMode::Random,
                Mode::Exhaustive => TestMode::Exhaustive,
                Mode::Mixed => TestMode::Mixed,
            }),
            dist: self.dist.map(|d| match d {
                Dist::Geometric => Distribution::Geometric,
                Dist::Uniform => Distribution::Uniform,
            }),
            backtrack: self.backtrack.on(),
            rewrite_depth: self.max_rewrite_depth,
            deterministic: self.deterministic.map(Switch::on),
        }
    }
}

fn structured(outcomes: &[SessionOutcome]) -> String {
    match outcomes {
        [one] => one.render_json(),
        many => {
            let mut s = serde_json::to_string_pretty(many).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

fn run(args: &Args) -> anyhow::Result<i32> {
    let options = args.options();
    let outcomes: Vec<SessionOutcome> = args.files.iter().map(|f| process_file(f, &options)).collect();
    let mut stdout = std::io::stdout().lock();
    if args.format != Format::Structured {
        for o in &outcomes {
            if outcomes.len() > 1 {
                writeln!(stdout, "==> {} <==", o.source)?;
            }
            stdout.write_all(o.render_text().as_bytes())?;
        }
    }
    if args.format != Format::Text {
        let doc = structured(&outcomes);
        match &args.report {
            Some(path) => std::fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?,
            None => stdout.write_all(doc.as_bytes())?,
        }
    }
    for o in &outcomes {
        if let Some(e) = &o.error {
            eprintln!("sedan: {e}");
        }
    }
    Ok(outcomes.iter().map(|o| o.exit_code).max().unwrap_or(0))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sedan: {e:#}");
            ExitCode::from(2)
        }
    }
}
