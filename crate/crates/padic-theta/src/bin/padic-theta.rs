//! Thin CLI over the pipeline: staged reproduction runs driven by a TOML
//! configuration. Exits 0 only if every inline invariant passed.

use clap::{Parser, Subcommand};
use padic_theta::pipeline::{self, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "padic-theta",
    about = "Exact p-adic deformations of ternary theta series: staged runs, operator tables, lifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the coefficient bound X.
    #[arg(long)]
    bound: Option<u64>,
    /// Override the p-adic working precision (digits).
    #[arg(long)]
    precision: Option<u32>,
    /// Output directory for CSV tables and the JSON report.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Enumeration threads (results are independent of this).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the configuration and verify the structural invariants.
    Validate(CommonArgs),
    /// All stages: validate, tables, truncated products, lifts.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Restrict to a single stage (validate|table1|table2|jside|lift).
        #[arg(long)]
        stage: Option<String>,
    },
    /// The four-piece counting table.
    Table1(CommonArgs),
    /// The operator table (derivative series, U-rows, eigencomponents).
    Table2(CommonArgs),
    /// Truncated-product values along the geodesic vector sets.
    Jside(CommonArgs),
    /// Shimura lifts of the U = 1 eigencomponent.
    Lift(CommonArgs),
}

fn run(stage: Stage, common: &CommonArgs) -> padic_theta::Result<bool> {
    let mut cfg = pipeline::load(&common.config)?;
    if let Some(t) = common.threads {
        cfg.run.threads = t;
    }
    let report = pipeline::run(cfg, stage, &common.out, common.bound, common.precision)?;
    for inv in &report.invariants {
        println!(
            "{} {}: {}",
            if inv.passed { "pass" } else { "FAIL" },
            inv.name,
            inv.detail
        );
    }
    for (name, st) in &report.stages {
        println!(
            "{} stage {}: {}",
            if st.ok { "pass" } else { "FAIL" },
            name,
            st.detail
        );
    }
    println!(
        "report: {}",
        common.out.join("report.json").display()
    );
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, common) = match &cli.command {
        Command::Validate(c) => (Stage::Validate, c),
        Command::Table1(c) => (Stage::Table1, c),
        Command::Table2(c) => (Stage::Table2, c),
        Command::Jside(c) => (Stage::Jside, c),
        Command::Lift(c) => (Stage::Lift, c),
        Command::Run { common, stage } => {
            let s = match stage {
                None => Stage::All,
                Some(name) => match Stage::parse(name) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                },
            };
            (s, common)
        }
    };
    match run(stage, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more invariants failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
