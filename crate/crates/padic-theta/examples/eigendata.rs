//! The conjugation action of gamma on the trace-zero space and its
//! eigendecomposition over `Q[x]/(x^2 + 5)`.
//!
//! Run with: cargo run --release --example eigendata

use padic_theta::quaternion::{conj_action_matrix, eigendecompose};
use padic_theta::sample;

fn main() -> padic_theta::Result<()> {
    let gamma = sample::gamma();
    println!("gamma = {gamma}");
    println!("nrd(gamma) = {}", gamma.nrd());

    let m = conj_action_matrix(&gamma)?;
    println!("conjugation action on (i, j, k):");
    for r in 0..3 {
        println!("  [{}, {}, {}]", m[(r, 0)], m[(r, 1)], m[(r, 2)]);
    }
    println!("det = {}", m.det());

    let eig = eigendecompose(&gamma)?;
    println!("field: x^2 + {} = 0", eig.c);
    println!("varpi = {}", eig.varpi);
    println!("w+ = ({}, {}, {})", eig.w_plus.x, eig.w_plus.y, eig.w_plus.z);
    println!("e  = ({}, {}, {})", eig.e.x, eig.e.y, eig.e.z);
    println!("w- = ({}, {}, {})", eig.w_minus.x, eig.w_minus.y, eig.w_minus.z);
    println!("<w+, w-> = {}", eig.pair_pm);
    println!(
        "Q(w+) = {} (isotropic)",
        eig.w_plus.q_value(&gamma.alg)
    );

    // After fixing the embedding, varpi gets the positive valuation and t
    // is read off from ord(varpi) = 2t.
    let ee = sample::embedded_eigen(12)?;
    println!("after embedding: ord(varpi) = 2t with t = {}", ee.t);
    Ok(())
}
