//! The operator table: the derivative series over p and its U_{p^2} iterates
//! mod 7, with the eigencomponent rows. Pass a bound as the first argument
//! (default 1372 shows the U row; 67228 adds the U^2 and eigencomponent
//! rows; 235298 also verifies the eigen-structure with a further U).
//!
//! Run with: cargo run --release --example operator_table -- 67228

use padic_theta::pipeline::{self, Pipeline};
use std::path::Path;

fn main() -> padic_theta::Result<()> {
    let bound: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1372);
    let cfg = pipeline::load(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/b2_13_p7.toml"
    )))?;
    let pipe = Pipeline::prepare(cfg)?;
    let t2 = pipe.table2(bound)?;
    println!("bound {bound}: U window {}, U^2 window {}",
        t2.u.as_ref().map_or(0, |s| s.bound()),
        t2.u2.as_ref().map_or(0, |s| s.bound()));
    print!("{}", t2.to_csv());
    println!(
        "eigen-structure verified: {} (window {})",
        t2.eord_flag.eigen_structure_verified, t2.eord_flag.verified_window
    );
    Ok(())
}
