//! p-neighbours of a unimodular lattice and depth along the gamma-geodesic.
//!
//! Run with: cargo run --release --example p_neighbors

use padic_theta::algebra::rational::Rat;
use padic_theta::lattice::{
    depth_and_parent, intersect_global_local, mutual_indices, p_neighbors, TernaryLattice,
};
use padic_theta::quaternion::Vec3Q;
use padic_theta::sample;

fn main() -> padic_theta::Result<()> {
    let l = TernaryLattice::standard(sample::algebra());
    let neighbors = p_neighbors(&l, 7)?;
    println!("the tree is (p+1)-regular: {} neighbours at p = 7", neighbors.len());
    for (i, n) in neighbors.iter().enumerate() {
        let (a, b) = mutual_indices(&l, n)?;
        println!("  neighbour {i}: [L : L∩L'] = {a}, [L' : L∩L'] = {b}");
    }

    // The geodesic lattices L_0, L_1 attached to gamma are p-neighbours.
    let ee = sample::embedded_eigen(12)?;
    let glat = sample::maximal_order_trace_zero();
    let m0 = intersect_global_local(&glat, &ee, 0)?;
    let m1 = intersect_global_local(&glat, &ee, 1)?;
    let (a, b) = mutual_indices(&m0, &m1)?;
    println!("order-covers at j = 0, 1: mutual indices ({a}, {b})");

    // Depth profiles of a few vectors.
    for (name, v) in [
        ("i", Vec3Q::new(Rat::one(), Rat::zero(), Rat::zero())),
        ("j", Vec3Q::new(Rat::zero(), Rat::one(), Rat::zero())),
        (
            "i/4 + j/2 + k/4",
            Vec3Q::new(Rat::new(1, 4), Rat::new(1, 2), Rat::new(1, 4)),
        ),
    ] {
        let d = depth_and_parent(&ee, &v)?;
        println!(
            "depth({name}) = {} with parent indices [{}, {}]",
            d.depth, d.parent_lo, d.parent_hi
        );
    }
    Ok(())
}
