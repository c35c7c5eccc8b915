//! Exact enumeration of short vectors in a definite ternary lattice, and the
//! covers used by the theta builder: exact intersections of a Z[1/p]-lattice
//! with the geodesic lattices at p.
//!
//! Run with: cargo run --release --example lattice_enumeration

use padic_theta::lattice::{intersect_global_local, TernaryLattice};
use padic_theta::sample;
use std::time::Instant;

fn main() -> padic_theta::Result<()> {
    // Q = 2x^2 + 13y^2 + 26z^2 on the standard basis (i, j, k).
    let l = TernaryLattice::standard(sample::algebra());
    for d in [1u64, 2, 5, 13, 26, 28] {
        let vs = l.enumerate_norm(d)?;
        println!("norm {d:>2}: {} vectors", vs.len());
    }

    // Streaming enumeration to a bound, with per-norm counts.
    let bound = 10_000u64;
    let t0 = Instant::now();
    let mut total = 0u64;
    l.enumerate_up_to(bound, |_, _| total += 1)?;
    println!("{total} vectors with 0 < Q <= {bound} in {:.2?}", t0.elapsed());

    // The enumeration covers of the theta pieces: exact Z-lattices
    // O ∩ L_j for the trace-zero part O of the maximal order.
    let ee = sample::embedded_eigen(12)?;
    let glat = sample::maximal_order_trace_zero();
    for j in 0..2i64 {
        let cover = intersect_global_local(&glat, &ee, j)?;
        println!("cover at j = {j}: basis");
        for b in &cover.basis {
            println!("  ({}, {}, {})  Q = {}", b.x, b.y, b.z, b.q_value(&ee.alg));
        }
    }
    Ok(())
}
