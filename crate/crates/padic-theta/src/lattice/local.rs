//! p-local lattices attached to the eigendecomposition of gamma: the depth-zero
//! geodesic lattices `L_j = p^j L[varpi] + L[1] + p^{-j} L[varpi^{-1}]`, exact
//! membership via valuations of eigen-coordinate functionals, and exact
//! Z-intersections with global Z[1/p]-lattices (the enumeration covers).

use crate::algebra::matrix::{kernel_mod_prime_powers, IntMat};
use crate::algebra::quadext::QuadExt;
use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use crate::lattice::{GlobalLattice, TernaryLattice};
use crate::padic::Embedding;
use crate::quaternion::{GammaEigenData, QuaternionAlgebra, Vec3K, Vec3Q};
use num_bigint::BigInt;
use std::sync::Arc;

/// Eigendata labeled by a fixed embedding: ord_p(varpi) = 2t > 0.
#[derive(Clone, Debug)]
pub struct EmbeddedEigen {
    pub alg: Arc<QuaternionAlgebra>,
    pub eig: GammaEigenData,
    pub emb: Embedding,
    pub t: u32,
}

impl EmbeddedEigen {
    /// Fix the labeling of (varpi, w+) against the embedding: varpi gets the
    /// positive valuation. Errors if gamma is not hyperbolic at p
    /// (ord(varpi) = 0).
    pub fn new(
        alg: Arc<QuaternionAlgebra>,
        eig: GammaEigenData,
        emb: Embedding,
    ) -> Result<Self> {
        if eig.c != emb.c {
            return Err(Error::QuadExtMismatch(
                eig.c.to_string(),
                emb.c.to_string(),
            ));
        }
        let v = emb
            .val_exact(&eig.varpi)?
            .expect("varpi is nonzero");
        if v == 0 {
            return Err(Error::NotHyperbolic(
                "varpi is a p-adic unit: gamma is not hyperbolic at p".into(),
            ));
        }
        let eig = if v > 0 { eig } else { eig.swapped() };
        let v = v.abs();
        if v % 2 != 0 {
            return Err(Error::NotHyperbolic(format!(
                "ord_p(varpi) = {v} is odd"
            )));
        }
        let mut eig = eig;
        let t = (v / 2) as u32;
        eig.t = Some(t);
        // <w+, w-> must be a p-adic unit for the geodesic lattices to be
        // unimodular in the w± coordinates.
        let pair_val = emb.val_exact(&eig.pair_pm)?.expect("nonzero pairing");
        if pair_val != 0 {
            return Err(Error::InvariantViolated(format!(
                "<w+, w-> has valuation {pair_val} != 0"
            )));
        }
        Ok(EmbeddedEigen { alg, eig, emb, t })
    }

    /// Eigen-coordinates of a rational vector: v = a w+ + b e + c w- with
    /// a = <v,w->/<w+,w->, b = <v,e>/<e,e>, c = <v,w+>/<w+,w->.
    pub fn eigen_coords(&self, v: &Vec3Q) -> (QuadExt, Rat, QuadExt) {
        let vk = v.to_quadext(&self.eig.c);
        let inv_pm = self.eig.pair_pm.inv().expect("unit pairing");
        let a = vk.pair(&self.eig.w_minus, &self.alg).mul(&inv_pm).unwrap();
        let c = vk.pair(&self.eig.w_plus, &self.alg).mul(&inv_pm).unwrap();
        let e_k = self.eig.e.to_quadext(&self.eig.c);
        let b_k = vk.pair(&e_k, &self.alg);
        debug_assert!(b_k.is_rational());
        let b = &b_k.a * &self.eig.pair_ee.inv();
        (a, b, c)
    }

    /// Exact valuations (None = +infinity) of the eigen-coordinates.
    pub fn eigen_valuations(&self, v: &Vec3Q) -> Result<(Option<i64>, Option<i64>, Option<i64>)> {
        let (a, b, c) = self.eigen_coords(v);
        Ok((
            self.emb.val_exact(&a)?,
            b.val_p(self.emb.ctx.p),
            self.emb.val_exact(&c)?,
        ))
    }

    pub fn local_lattice(&self, j: i64) -> LocalLatticeAtP {
        LocalLatticeAtP::from_eigen(self, j)
    }
}

/// The geodesic lattice L_j: v is a member iff its (w+, e, w-) coordinates
/// (a, b, c) satisfy v(a) >= j, v(b) >= 0, v(c) >= -j.
#[derive(Clone, Debug)]
pub struct LocalLatticeAtP {
    pub j: i64,
    /// Basis (p^j w+, e, p^{-j} w-) as vectors over K; membership means the
    /// coordinates in this basis have nonnegative valuation.
    pub basis: [Vec3K; 3],
}

impl LocalLatticeAtP {
    pub fn from_eigen(ee: &EmbeddedEigen, j: i64) -> Self {
        let p = Rat::from_int(ee.emb.ctx.p as i64);
        let pj = QuadExt::from_rat(&ee.eig.c, p.pow_i64(j));
        let pmj = QuadExt::from_rat(&ee.eig.c, p.pow_i64(-j));
        LocalLatticeAtP {
            j,
            basis: [
                ee.eig.w_plus.scale(&pj),
                ee.eig.e.to_quadext(&ee.eig.c),
                ee.eig.w_minus.scale(&pmj),
            ],
        }
    }

    /// Exact membership of a rational vector.
    pub fn contains(&self, ee: &EmbeddedEigen, v: &Vec3Q) -> Result<bool> {
        let (va, vb, vc) = ee.eigen_valuations(v)?;
        Ok(va.map_or(true, |x| x >= self.j)
            && vb.map_or(true, |x| x >= 0)
            && vc.map_or(true, |x| x >= -self.j))
    }
}

/// Exact Z-lattice O ∩ L_j for a global Z[1/p]-lattice O: the set of v lying
/// in O at every place away from p and in L_j at p. Computed by solving the
/// valuation conditions as integer congruences on a p-power-scaled copy of
/// O's Z-span, then verified vector by vector (each basis vector must pass
/// the exact membership tests) and by a stability check at higher precision.
pub fn intersect_global_local(
    global: &GlobalLattice,
    ee: &EmbeddedEigen,
    j: i64,
) -> Result<TernaryLattice> {
    let p = ee.emb.ctx.p;
    let local = ee.local_lattice(j);
    // Shift m2: O ∩ L_j ⊆ p^{-m2} * (Z-span of O).
    let mut m2: i64 = 0;
    {
        // L_j's K-basis vectors, in coordinates of O's Z-span, have some
        // minimal valuation -m2; any Z_p-combination keeps valuation >= -m2.
        let inv = &global.lattice.inv_basis;
        for b in &local.basis {
            for col in 0..3 {
                let mut acc = QuadExt::zero(&ee.eig.c);
                let coords = b.coords();
                for (row, cr) in coords.iter().enumerate() {
                    acc = acc.add(&cr.scale(&inv[(col, row)])).unwrap();
                }
                if let Some(v) = ee.emb.val_exact(&acc)? {
                    m2 = m2.max(-v);
                }
            }
        }
    }
    let scaled_basis: Vec<Vec3Q> = {
        let f = Rat::from_int(p as i64).pow_i64(-m2);
        global
            .lattice
            .basis
            .iter()
            .map(|b| b.scale(&f))
            .collect()
    };
    // Conditions on x in Z^3 (coords in the scaled basis): for each of the
    // three functionals, val(sum x_i f(u_i)) >= bound. Normalize each row by
    // the minimal valuation mu of its coefficients and reduce to an integer
    // congruence mod p^{bound - mu} (no condition if bound <= mu).
    let result = solve_valuation_congruences(ee, &scaled_basis, j, ee.emb.ctx.n)?;
    // Stability: recomputing with more digits must give the same lattice.
    let result2 = solve_valuation_congruences(ee, &scaled_basis, j, ee.emb.ctx.n + 4)?;
    if result != result2 {
        return Err(Error::CoverInsufficient(
            "intersection lattice did not stabilize under precision raise".into(),
        ));
    }
    // Build the lattice and verify each basis vector exactly.
    let mut basis = Vec::with_capacity(3);
    for r in 0..3 {
        let mut acc = Vec3Q::new(Rat::zero(), Rat::zero(), Rat::zero());
        for (i, sb) in scaled_basis.iter().enumerate() {
            let c = Rat::from_bigint(result[(r, i)].clone());
            acc = Vec3Q::new(
                &acc.x + &(&c * &sb.x),
                &acc.y + &(&c * &sb.y),
                &acc.z + &(&c * &sb.z),
            );
        }
        basis.push(acc);
    }
    let lat = TernaryLattice::new(global.lattice.alg.clone(), basis.try_into().unwrap())?;
    for b in &lat.basis {
        if !global.contains(b) {
            return Err(Error::CoverInsufficient(
                "intersection basis vector leaves the global lattice".into(),
            ));
        }
        if !local.contains(ee, b)? {
            return Err(Error::CoverInsufficient(
                "intersection basis vector leaves the local lattice".into(),
            ));
        }
    }
    Ok(lat)
}

fn solve_valuation_congruences(
    ee: &EmbeddedEigen,
    scaled_basis: &[Vec3Q],
    j: i64,
    digits: u32,
) -> Result<IntMat> {
    let p = ee.emb.ctx.p;
    let emb = crate::padic::hensel_root(&ee.emb.c, p, ee.emb.seed, digits.min(crate::padic::max_precision(p)))?;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut mods: Vec<u32> = Vec::new();
    // Three functionals with their lower bounds.
    let coords: Vec<(Vec<QuadExt>, i64)> = {
        let mut out = Vec::new();
        let mut fa = Vec::new();
        let mut fb = Vec::new();
        let mut fc = Vec::new();
        for u in scaled_basis {
            let (a, b, c) = ee.eigen_coords(u);
            fa.push(a);
            fb.push(QuadExt::from_rat(&ee.eig.c, b));
            fc.push(c);
        }
        out.push((fa, j));
        out.push((fb, 0));
        out.push((fc, -j));
        out
    };
    for (fs, bound) in &coords {
        // mu = min valuation of the coefficients (None if all are zero).
        let mut mu: Option<i64> = None;
        for f in fs {
            if let Some(v) = emb.val_exact(f)? {
                mu = Some(mu.map_or(v, |m: i64| m.min(v)));
            }
        }
        let Some(mu) = mu else {
            continue; // identically zero functional: no condition
        };
        let k = *bound - mu;
        if k <= 0 {
            continue; // condition holds for all integer vectors
        }
        let k = k as u32;
        if k + 2 > emb.ctx.n {
            return Err(Error::PrecisionExhausted(format!(
                "congruence modulus p^{k} exceeds working precision {}",
                emb.ctx.n
            )));
        }
        // Row of residues of f_i / p^mu mod p^k.
        let scale = Rat::from_int(p as i64).pow_i64(-mu);
        let mut row = Vec::with_capacity(fs.len());
        for f in fs {
            let g = f.scale(&scale);
            // residue of the embedded value
            let x = emb.embed(&g).map(|pn| match pn.valuation {
                None => 0u64,
                Some(v) => {
                    debug_assert!(v >= 0);
                    let mut r = pn.unit;
                    for _ in 0..v.min(emb.ctx.n as i64) {
                        r = emb.ctx.mul(r, p);
                    }
                    r
                }
            });
            let x = match x {
                Ok(r) => r,
                Err(Error::PrecisionExhausted(_)) => 0, // valuation >= n >= k: residue 0 mod p^k
                Err(e) => return Err(e),
            };
            row.push(BigInt::from(x));
        }
        rows.push(row);
        mods.push(k);
    }
    if rows.is_empty() {
        return Ok(IntMat::identity(3));
    }
    let mut a = IntMat::zero(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        for (jj, v) in row.iter().enumerate() {
            a[(i, jj)] = v.clone();
        }
    }
    Ok(kernel_mod_prime_powers(&a, p, &mods))
}

/// Depth of a vector with respect to gamma, with the realizable parent range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthProfile {
    pub depth: i64,
    /// Geodesic indices k with p^depth * v in L_k: the closed interval
    /// [k_min, k_max] (k_min realizes the +pairing unit, k_max the -pairing).
    pub parent_lo: i64,
    pub parent_hi: i64,
    /// parent_lo reduced to {0, .., 2t-1} (the fundamental range mod 2t).
    pub parent_mod_2t: u32,
}

/// Depth of v: the least n >= 0 with p^n v inside some geodesic lattice L_k.
/// In eigen-valuations (va, vb, vc) this is max(0, -vb, ceil(-(va+vc)/2)).
pub fn depth_and_parent(ee: &EmbeddedEigen, v: &Vec3Q) -> Result<DepthProfile> {
    if v.is_zero() {
        return Err(Error::InvariantViolated("depth of the zero vector".into()));
    }
    let (va, vb, vc) = ee.eigen_valuations(v)?;
    // If v lies on an eigenline the depth is 0 along that line; the formulas
    // below treat infinite valuations as "no constraint".
    let mut n: i64 = 0;
    if let Some(vb) = vb {
        n = n.max(-vb);
    }
    if let (Some(va), Some(vc)) = (va, vc) {
        let s = va + vc;
        // ceil(-s / 2)
        let need = if s >= 0 { 0 } else { (-s + 1) / 2 };
        n = n.max(need);
    }
    let lo = vc.map_or(i64::MIN / 4, |vc| -vc - n);
    let hi = va.map_or(i64::MAX / 4, |va| va + n);
    if lo > hi {
        return Err(Error::InvariantViolated(format!(
            "empty parent interval [{lo}, {hi}] at depth {n}"
        )));
    }
    let two_t = 2 * ee.t as i64;
    let parent_mod_2t = lo.rem_euclid(two_t) as u32;
    Ok(DepthProfile {
        depth: n,
        parent_lo: lo,
        parent_hi: hi,
        parent_mod_2t,
    })
}

/// Positive-definite Z-cover of a Z[1/p]-lattice refined by a list of local
/// lattices: p^{-m} (Z-span of the global basis) with m minimal such that
/// every listed local lattice's basis sits inside with nonnegative-valuation
/// coordinates.
pub fn localized_cover(
    global: &GlobalLattice,
    ee: &EmbeddedEigen,
    locals: &[LocalLatticeAtP],
) -> Result<TernaryLattice> {
    let inv = &global.lattice.inv_basis;
    let mut m: i64 = 0;
    for l in locals {
        for b in &l.basis {
            for col in 0..3 {
                let mut acc = QuadExt::zero(&ee.eig.c);
                let coords = b.coords();
                for (row, cr) in coords.iter().enumerate() {
                    acc = acc.add(&cr.scale(&inv[(col, row)])).unwrap();
                }
                if let Some(v) = ee.emb.val_exact(&acc)? {
                    m = m.max(-v);
                }
            }
        }
    }
    let f = Rat::from_int(ee.emb.ctx.p as i64).pow_i64(-m);
    let basis: Vec<Vec3Q> = global
        .lattice
        .basis
        .iter()
        .map(|b| b.scale(&f))
        .collect();
    TernaryLattice::new(global.lattice.alg.clone(), basis.try_into().unwrap())
}
