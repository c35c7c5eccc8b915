//! Truncated products over the geodesic vector sets: the log of the stage-n
//! product against the consecutive coefficient sums of the derivative
//! series, and the exact vanishing of the exponent sums.
//!
//! Run with: cargo run --release --example jside_products

use padic_theta::pipeline::{self, Pipeline};
use std::path::Path;

fn main() -> padic_theta::Result<()> {
    let cfg = pipeline::load(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/b2_13_p7.toml"
    )))?;
    let pipe = Pipeline::prepare(cfg)?;
    for d in [2u64, 5] {
        let (rows, vanish) = pipe.jside(d, 1)?;
        println!("D = {d} (exponent sums vanish: {vanish})");
        for r in &rows {
            println!(
                "  n = {}: stage log = {} | consecutive sum = {}  (mod {})",
                r.n, r.stage_log, r.consecutive_sum, r.modulus
            );
        }
        // the stage values telescope into the consecutive sums
        let m = rows[0].modulus;
        assert_eq!(
            (rows[0].stage_log + rows[1].stage_log) % m,
            rows[0].consecutive_sum % m
        );
        println!(
            "  stabilized window value mod 7: {}",
            rows[1].consecutive_sum % 7
        );
    }
    Ok(())
}
