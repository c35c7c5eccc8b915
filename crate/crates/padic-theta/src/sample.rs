//! Built-in demonstration data: the definite quaternion algebra with
//! i^2 = -2, j^2 = -13 (ramified at 13 and infinity), its maximal
//! Z[1/7]-order, the level-3 Eichler suborder cut out by alpha = 1 + i, and
//! the hyperbolic norm-one unit gamma = 2/7 + 3i/28 + 3j/14 + 3k/28 whose
//! eigendata drives the p = 7 theta deformation. Used by the examples, the
//! test suite and the default configuration.

use crate::algebra::quadext::QuadExt;
use crate::algebra::rational::Rat;
use crate::error::Result;
use crate::lattice::{EmbeddedEigen, GlobalLattice, TernaryLattice};
use crate::padic::{hensel_root, Embedding};
use crate::quaternion::{
    eigendecompose, Order, Quat, QuaternionAlgebra, QuatQ, ScalarRing, Vec3, Vec3K, Vec3Q,
};
use std::sync::Arc;

pub const P: u64 = 7;
pub const HENSEL_SEED: u64 = 3;
/// Prime at which the algebra ramifies; theta coefficients vanish at D with
/// -D a nonzero square mod this prime.
pub const SUPPORT_PRIME: u64 = 13;

pub fn algebra() -> Arc<QuaternionAlgebra> {
    Arc::new(QuaternionAlgebra::new(Rat::from_int(-2), Rat::from_int(-13)))
}

fn q(alg: &Arc<QuaternionAlgebra>, t: (i64, i64), x: (i64, i64), y: (i64, i64), z: (i64, i64)) -> QuatQ {
    Quat::new(
        alg,
        Rat::new(t.0, t.1),
        Rat::new(x.0, x.1),
        Rat::new(y.0, y.1),
        Rat::new(z.0, z.1),
    )
}

/// The maximal Z[1/7]-order <1/2 + j/2 + k/2, i/4 + j/2 + k/4, j, k>.
pub fn maximal_order() -> Order {
    let alg = algebra();
    let basis = [
        q(&alg, (1, 2), (0, 1), (1, 2), (1, 2)),
        q(&alg, (0, 1), (1, 4), (1, 2), (1, 4)),
        q(&alg, (0, 1), (0, 1), (1, 1), (0, 1)),
        q(&alg, (0, 1), (0, 1), (0, 1), (1, 1)),
    ];
    Order::new(alg, basis, ScalarRing::IntInvP(P)).expect("maximal order data is closed")
}

/// alpha = 1 + i, of reduced norm 3.
pub fn alpha() -> QuatQ {
    let alg = algebra();
    q(&alg, (1, 1), (1, 1), (0, 1), (0, 1))
}

/// The Eichler order R = R~ ∩ alpha R~ alpha^{-1} of level 3.
pub fn eichler_order() -> Order {
    let rt = maximal_order();
    let conj = rt.conjugate_by(&alpha()).expect("conjugate order");
    rt.intersect(&conj).expect("order intersection")
}

/// gamma = 2/7 + 3i/28 + 3j/14 + 3k/28, a norm-one unit of R.
pub fn gamma() -> QuatQ {
    let alg = algebra();
    q(&alg, (2, 7), (3, 28), (3, 14), (3, 28))
}

/// Z[1/7]-lattice of trace-zero elements of the maximal order.
pub fn maximal_order_trace_zero() -> GlobalLattice {
    let rt = maximal_order();
    let tz = rt.trace_zero_part().expect("trace-zero part");
    let lat = TernaryLattice::new(rt.alg.clone(), tz).expect("rank 3");
    GlobalLattice::new(lat, P)
}

/// Z[1/7]-lattice of trace-zero elements of alpha R~ alpha^{-1}.
pub fn conjugated_order_trace_zero() -> GlobalLattice {
    let rt = maximal_order();
    let conj = rt.conjugate_by(&alpha()).expect("conjugate order");
    let tz = conj.trace_zero_part().expect("trace-zero part");
    let lat = TernaryLattice::new(conj.alg.clone(), tz).expect("rank 3");
    GlobalLattice::new(lat, P)
}

/// The eigenvector w+ = i + (4x/39 - 2/39) j + (-4x/39 - 1/39) k over
/// K = `Q[x]/(x^2 + 5)`.
pub fn w_plus_printed() -> Vec3K {
    let c = Rat::from_int(5);
    Vec3::new(
        QuadExt::one(&c),
        QuadExt::new(c.clone(), Rat::new(-2, 39), Rat::new(4, 39)),
        QuadExt::new(c.clone(), Rat::new(-1, 39), Rat::new(-4, 39)),
    )
}

/// The embedding of K = `Q[x]/(x^2 + 5)` into Q_7 with x ≡ 3 mod 7
/// (the choice under which ord(varpi) = 2).
pub fn embedding(precision: u32) -> Result<Embedding> {
    hensel_root(&Rat::from_int(5), P, HENSEL_SEED, precision)
}

/// Labeled eigendata at the given precision: t = 1 for this configuration.
pub fn embedded_eigen(precision: u32) -> Result<EmbeddedEigen> {
    let eig = eigendecompose(&gamma())?;
    let emb = embedding(precision)?;
    EmbeddedEigen::new(algebra(), eig, emb)
}

/// The fixed vector e = i + 2j + k.
pub fn e_vector() -> Vec3Q {
    Vec3Q::new(Rat::one(), Rat::from_int(2), Rat::one())
}
