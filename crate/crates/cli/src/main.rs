//! Command-line harness: scenario runs, reference-table and figure
//! reproduction, and oracle cross-checks.
//!
//! Every verb prints to stdout (or `--out <path>`); validation failures exit
//! nonzero with a machine-readable JSON error document on stderr.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use ris_sparse::alloc::SolverConfig;
use ris_sparse_cli::runners::{
    render_figure, render_table, run_oracle, run_scenario, OutputFormat,
};
use ris_sparse_cli::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ris-sparse",
    version,
    about = "Capacity-optimal power and surface-area allocation for reflecting-surface MIMO links over sparse beamspace channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Parser)]
struct CommonFlags {
    /// Write the output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence tolerance override for the iterative solvers.
    #[arg(long)]
    eps: Option<f64>,
    /// Iteration-cap override for the iterative solvers.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file end to end and emit the result document.
    Run {
        /// Scenario file (TOML).
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Reproduce a built-in reference table (capacity versus rank).
    Table {
        /// `table1` (reflection only) or `table2` (direct + reflected).
        id: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Emit plot data for a built-in figure.
    Figure {
        /// One of fig3, fig4_5, fig6, fig7, fig8.
        id: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Cross-check a scenario's allocation against the multistart oracle.
    Oracle {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Number of random starting points.
        #[arg(long, default_value_t = 50)]
        starts: usize,
        /// Seed for the random starts (defaults to the scenario's seed).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn solver_with_overrides(base: SolverConfig, flags: &CommonFlags) -> Result<SolverConfig> {
    SolverConfig::new(
        flags.eps.unwrap_or(base.eps_conv),
        flags.max_iter.unwrap_or(base.max_iterations),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            format,
            common,
        } => {
            let s = Scenario::load(&scenario)?;
            let solver = solver_with_overrides(s.solver, &common)?;
            let doc = run_scenario(&s, &solver)?;
            let text = match format {
                Format::Json => doc.to_json(),
                Format::Csv => doc.to_csv(),
            };
            emit(&text, &common.out)
        }
        Command::Table { id, format, common } => {
            let solver = solver_with_overrides(SolverConfig::default(), &common)?;
            let text = render_table(&id, format.into(), &solver)?;
            emit(&text, &common.out)
        }
        Command::Figure { id, format, common } => {
            let solver = solver_with_overrides(SolverConfig::default(), &common)?;
            let text = render_figure(&id, format.into(), &solver)?;
            emit(&text, &common.out)
        }
        Command::Oracle {
            scenario,
            starts,
            seed,
            format,
            common,
        } => {
            let s = Scenario::load(&scenario)?;
            let solver = solver_with_overrides(s.solver, &common)?;
            let doc = run_oracle(&s, &solver, starts, seed.unwrap_or(s.seed))?;
            let text = match format {
                Format::Json => doc.to_json(),
                Format::Csv => doc.to_csv(),
            };
            emit(&text, &common.out)
        }
    }
}

fn classify(err: &anyhow::Error) -> &'static str {
    if err.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    if err.downcast_ref::<ris_sparse::Error>().is_some() {
        return "compute";
    }
    let text = format!("{err:#}");
    if text.contains("failed to parse") || text.contains("cannot read") {
        "parse"
    } else {
        "validation"
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        let doc = serde_json::json!({
            "error": {
                "kind": classify(&err),
                "message": format!("{err:#}"),
            }
        });
        eprintln!("{}", serde_json::to_string_pretty(&doc).expect("error document"));
        std::process::exit(1);
    }
}
