//! Full staged run through the library API: validation, both tables, the
//! truncated products and the lift stage, with CSV and JSON artifacts
//! written to ./out.
//!
//! Run with: cargo run --release --example pipeline_run

use padic_theta::pipeline::{self, Stage};
use std::path::Path;

fn main() -> padic_theta::Result<()> {
    let cfg = pipeline::load(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/b2_13_p7.toml"
    )))?;
    let report = pipeline::run(cfg, Stage::All, Path::new("out"), None, None)?;
    for inv in &report.invariants {
        println!(
            "{} {}: {}",
            if inv.passed { "pass" } else { "FAIL" },
            inv.name,
            inv.detail
        );
    }
    for (name, st) in &report.stages {
        println!("stage {name}: {}", st.detail);
    }
    println!("artifacts in ./out (report.json, table1.csv, table2.csv)");
    assert!(report.all_passed());
    Ok(())
}
