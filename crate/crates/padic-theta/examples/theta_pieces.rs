//! The four counting pieces theta^{±}_{O, L_j}: vectors of the trace-zero
//! part of the maximal order, split by geodesic lattice membership and the
//! unit-pairing sign conditions.
//!
//! Run with: cargo run --release --example theta_pieces

use padic_theta::sample;
use padic_theta::schwartz::SchwartzWeight;
use padic_theta::theta::{theta, ThetaRunConfig, WeightSpec};

fn main() -> padic_theta::Result<()> {
    let ee = sample::embedded_eigen(12)?;
    let order = sample::maximal_order_trace_zero();
    let phi = SchwartzWeight::from_lattices(vec![(1, order)]);
    let ds: Vec<u64> = vec![2, 5, 6, 7, 8, 11, 13, 15, 18, 19, 20, 21, 24, 26, 28, 31, 32];
    let cfg = ThetaRunConfig::new(*ds.iter().max().unwrap());
    let out = theta(&phi, &ee, WeightSpec::IntegerPower(0), &cfg)?;
    print!("{:>14}", "D:");
    for d in &ds {
        print!("{d:>4}");
    }
    println!();
    for piece in &out.pieces {
        for (sign, counts) in [("+", &piece.count_plus), ("-", &piece.count_minus)] {
            print!("theta^{sign}_(O,L{}):", piece.j);
            for d in &ds {
                print!("{:>4}", counts[*d as usize]);
            }
            println!();
        }
    }
    println!(
        "({} vectors enumerated, {} telescope identities asserted inline)",
        out.checks.vectors_checked, out.checks.telescope_asserts
    );
    Ok(())
}
