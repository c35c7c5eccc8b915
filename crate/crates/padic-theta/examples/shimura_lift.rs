//! Shimura lifts of the U = 1 eigencomponent of the derivative series, fitted
//! against the reference weight-two eigenform mod 7. Needs the U^2 window, so
//! the default bound is 67228 (about fifteen seconds in release mode).
//!
//! Run with: cargo run --release --example shimura_lift

use padic_theta::pipeline::{self, Pipeline};
use std::path::Path;

fn main() -> padic_theta::Result<()> {
    let bound: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(67228);
    let cfg = pipeline::load(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/b2_13_p7.toml"
    )))?;
    let pipe = Pipeline::prepare(cfg)?;
    let t2 = pipe.table2(bound)?;
    let report = pipe.lift(&t2, t2.eord_flag.eigen_structure_verified)?;
    for (disc, scalar) in &report.fitted_scalars {
        println!(
            "disc {disc}: lift values {:?} at n = {:?}, fitted scalar {:?}",
            report.lift_values[disc], report.computed_indices[disc], scalar
        );
    }
    println!("{}", report.normalization_note);
    Ok(())
}
