//! Rational quaternion algebras B = (a, b | Q), their Z- and Z[1/p]-orders,
//! the trace-zero quadratic space (V, Q, <,>) and the conjugation action,
//! including the eigendecomposition attached to a norm-one unit that is
//! hyperbolic at p.

use crate::algebra::matrix::{hermite_form, IntMat, RatMat};
use crate::algebra::quadext::{FieldElem, QuadExt};
use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// B = (a, b | Q): i^2 = a, j^2 = b, ij = -ji = k, k^2 = -ab.
#[derive(Clone, PartialEq, Debug)]
pub struct QuaternionAlgebra {
    pub a: Rat,
    pub b: Rat,
}

impl QuaternionAlgebra {
    pub fn new(a: Rat, b: Rat) -> Self {
        assert!(!a.is_zero() && !b.is_zero());
        QuaternionAlgebra { a, b }
    }

    /// Gram diagonal of Q on trace-zero coordinates (i, j, k):
    /// Q(x i + y j + z k) = -a x^2 - b y^2 + a b z^2.
    pub fn q_diag(&self) -> [Rat; 3] {
        [
            -self.a.clone(),
            -self.b.clone(),
            &self.a * &self.b,
        ]
    }
}

/// Element t + x i + y j + z k with coefficients in a field F
/// (exact rationals or a quadratic extension).
#[derive(Clone, PartialEq, Debug)]
pub struct Quat<F: FieldElem> {
    pub alg: Arc<QuaternionAlgebra>,
    pub t: F,
    pub x: F,
    pub y: F,
    pub z: F,
}

pub type QuatQ = Quat<Rat>;

impl<F: FieldElem> Quat<F> {
    pub fn new(alg: &Arc<QuaternionAlgebra>, t: F, x: F, y: F, z: F) -> Self {
        Quat {
            alg: alg.clone(),
            t,
            x,
            y,
            z,
        }
    }

    fn lift(&self, r: &Rat) -> F {
        self.t.f_from_rat(r)
    }

    pub fn coeffs(&self) -> [F; 4] {
        [
            self.t.clone(),
            self.x.clone(),
            self.y.clone(),
            self.z.clone(),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.t.f_is_zero() && self.x.f_is_zero() && self.y.f_is_zero() && self.z.f_is_zero()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_alg(o)?;
        Ok(Quat::new(
            &self.alg,
            self.t.f_add(&o.t),
            self.x.f_add(&o.x),
            self.y.f_add(&o.y),
            self.z.f_add(&o.z),
        ))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_alg(o)?;
        Ok(Quat::new(
            &self.alg,
            self.t.f_sub(&o.t),
            self.x.f_sub(&o.x),
            self.y.f_sub(&o.y),
            self.z.f_sub(&o.z),
        ))
    }

    pub fn neg(&self) -> Self {
        Quat::new(
            &self.alg,
            self.t.f_neg(),
            self.x.f_neg(),
            self.y.f_neg(),
            self.z.f_neg(),
        )
    }

    pub fn scale(&self, r: &F) -> Self {
        Quat::new(
            &self.alg,
            self.t.f_mul(r),
            self.x.f_mul(r),
            self.y.f_mul(r),
            self.z.f_mul(r),
        )
    }

    fn check_alg(&self, o: &Self) -> Result<()> {
        if self.alg.as_ref() != o.alg.as_ref() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    /// Product under i^2 = a, j^2 = b, ij = -ji = k.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_alg(o)?;
        let a = self.lift(&self.alg.a);
        let b = self.lift(&self.alg.b);
        let ab = a.f_mul(&b);
        let (t1, x1, y1, z1) = (&self.t, &self.x, &self.y, &self.z);
        let (t2, x2, y2, z2) = (&o.t, &o.x, &o.y, &o.z);
        // (t1 + x1 i + y1 j + z1 k)(t2 + x2 i + y2 j + z2 k)
        let t = t1
            .f_mul(t2)
            .f_add(&a.f_mul(&x1.f_mul(x2)))
            .f_add(&b.f_mul(&y1.f_mul(y2)))
            .f_sub(&ab.f_mul(&z1.f_mul(z2)));
        let x = t1
            .f_mul(x2)
            .f_add(&x1.f_mul(t2))
            .f_sub(&b.f_mul(&y1.f_mul(z2)))
            .f_add(&b.f_mul(&z1.f_mul(y2)));
        let y = t1
            .f_mul(y2)
            .f_add(&y1.f_mul(t2))
            .f_add(&a.f_mul(&x1.f_mul(z2)))
            .f_sub(&a.f_mul(&z1.f_mul(x2)));
        let z = t1
            .f_mul(z2)
            .f_add(&z1.f_mul(t2))
            .f_add(&x1.f_mul(y2))
            .f_sub(&y1.f_mul(x2));
        Ok(Quat::new(&self.alg, t, x, y, z))
    }

    pub fn conj(&self) -> Self {
        Quat::new(
            &self.alg,
            self.t.clone(),
            self.x.f_neg(),
            self.y.f_neg(),
            self.z.f_neg(),
        )
    }

    /// Reduced trace 2t.
    pub fn trd(&self) -> F {
        self.t.f_add(&self.t)
    }

    /// Reduced norm t^2 - a x^2 - b y^2 + a b z^2.
    pub fn nrd(&self) -> F {
        let a = self.lift(&self.alg.a);
        let b = self.lift(&self.alg.b);
        let ab = a.f_mul(&b);
        self.t
            .f_mul(&self.t)
            .f_sub(&a.f_mul(&self.x.f_mul(&self.x)))
            .f_sub(&b.f_mul(&self.y.f_mul(&self.y)))
            .f_add(&ab.f_mul(&self.z.f_mul(&self.z)))
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.nrd();
        if n.f_is_zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.conj().scale(&n.f_inv()))
    }
}

impl QuatQ {
    pub fn from_rats(alg: &Arc<QuaternionAlgebra>, c: [Rat; 4]) -> Self {
        let [t, x, y, z] = c;
        Quat::new(alg, t, x, y, z)
    }

    pub fn one(alg: &Arc<QuaternionAlgebra>) -> Self {
        Quat::new(alg, Rat::one(), Rat::zero(), Rat::zero(), Rat::zero())
    }
}

/// Vector in V = trace-zero part of B, coordinates in basis (i, j, k).
#[derive(Clone, PartialEq, Debug)]
pub struct Vec3<F: FieldElem> {
    pub x: F,
    pub y: F,
    pub z: F,
}

pub type Vec3Q = Vec3<Rat>;
pub type Vec3K = Vec3<QuadExt>;

impl<F: FieldElem> Vec3<F> {
    pub fn new(x: F, y: F, z: F) -> Self {
        Vec3 { x, y, z }
    }

    pub fn coords(&self) -> [F; 3] {
        [self.x.clone(), self.y.clone(), self.z.clone()]
    }

    pub fn is_zero(&self) -> bool {
        self.x.f_is_zero() && self.y.f_is_zero() && self.z.f_is_zero()
    }

    pub fn neg(&self) -> Self {
        Vec3::new(self.x.f_neg(), self.y.f_neg(), self.z.f_neg())
    }

    pub fn scale(&self, r: &F) -> Self {
        Vec3::new(self.x.f_mul(r), self.y.f_mul(r), self.z.f_mul(r))
    }

    /// Q(v) = -a x^2 - b y^2 + a b z^2 = nrd of the trace-zero element.
    pub fn q_value(&self, alg: &QuaternionAlgebra) -> F {
        let a = self.x.f_from_rat(&alg.a);
        let b = self.x.f_from_rat(&alg.b);
        let ab = a.f_mul(&b);
        ab.f_mul(&self.z.f_mul(&self.z))
            .f_sub(&a.f_mul(&self.x.f_mul(&self.x)))
            .f_sub(&b.f_mul(&self.y.f_mul(&self.y)))
    }

    /// <v, w> = Q(v + w) - Q(v) - Q(w) = 2(-a x x' - b y y' + a b z z').
    pub fn pair(&self, other: &Vec3<F>, alg: &QuaternionAlgebra) -> F {
        let a = self.x.f_from_rat(&alg.a);
        let b = self.x.f_from_rat(&alg.b);
        let ab = a.f_mul(&b);
        let s = ab
            .f_mul(&self.z.f_mul(&other.z))
            .f_sub(&a.f_mul(&self.x.f_mul(&other.x)))
            .f_sub(&b.f_mul(&self.y.f_mul(&other.y)));
        s.f_add(&s)
    }
}

impl Vec3Q {
    /// Embed a rational vector into the quadratic extension of w.
    pub fn to_quadext(&self, c: &Rat) -> Vec3K {
        Vec3::new(
            QuadExt::from_rat(c, self.x.clone()),
            QuadExt::from_rat(c, self.y.clone()),
            QuadExt::from_rat(c, self.z.clone()),
        )
    }

    pub fn from_quat(q: &QuatQ) -> Result<Self> {
        if !q.t.is_zero() {
            return Err(Error::InvariantViolated(format!(
                "element has nonzero trace {}",
                q.trd()
            )));
        }
        Ok(Vec3::new(q.x.clone(), q.y.clone(), q.z.clone()))
    }

    pub fn to_quat(&self, alg: &Arc<QuaternionAlgebra>) -> QuatQ {
        Quat::new(
            alg,
            Rat::zero(),
            self.x.clone(),
            self.y.clone(),
            self.z.clone(),
        )
    }
}

/// Scalar ring of an order: Z or Z[1/p].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScalarRing {
    Int,
    IntInvP(u64),
}

impl ScalarRing {
    /// Is r in the scalar ring? For Z[1/p] the denominator must be a power of p.
    pub fn contains(&self, r: &Rat) -> bool {
        match self {
            ScalarRing::Int => r.is_integer(),
            ScalarRing::IntInvP(p) => {
                let mut d = r.denom().clone();
                let p = BigInt::from(*p);
                while !d.is_one() {
                    let (q, rem) = num_integer::Integer::div_rem(&d, &p);
                    if !rem.is_zero() {
                        return false;
                    }
                    d = q;
                }
                true
            }
        }
    }
}

/// An order (or more generally a full lattice closed under multiplication)
/// in B over Z or Z[1/p], given by a 4-element basis.
#[derive(Clone, Debug)]
pub struct Order {
    pub alg: Arc<QuaternionAlgebra>,
    pub basis: [QuatQ; 4],
    pub ring: ScalarRing,
    /// Inverse of the basis matrix (columns = basis coefficient vectors),
    /// used for exact coordinate solves.
    inv_basis: RatMat,
}

impl Order {
    /// Builds the order and verifies closure: 1 is in the lattice and all 16
    /// pairwise basis products have scalar-ring coordinates.
    pub fn new(alg: Arc<QuaternionAlgebra>, basis: [QuatQ; 4], ring: ScalarRing) -> Result<Self> {
        let m = basis_matrix(&basis);
        let inv_basis = m
            .inverse()
            .map_err(|_| Error::NotAnOrder("basis is not full rank".into()))?;
        let order = Order {
            alg,
            basis,
            ring,
            inv_basis,
        };
        let one = QuatQ::one(&order.alg);
        if !order.contains(&one) {
            return Err(Error::NotAnOrder("1 is not in the lattice".into()));
        }
        for (bi, ei) in order.basis.iter().enumerate() {
            for (bj, ej) in order.basis.iter().enumerate() {
                let prod = ei.mul(ej)?;
                if !order.contains(&prod) {
                    return Err(Error::NotAnOrder(format!(
                        "product of basis elements {bi} and {bj} leaves the lattice"
                    )));
                }
            }
        }
        Ok(order)
    }

    /// Coordinates of q in this basis.
    pub fn coords(&self, q: &QuatQ) -> Vec<Rat> {
        self.inv_basis.mul_vec(&q.coeffs())
    }

    /// Membership over the scalar ring.
    pub fn contains(&self, q: &QuatQ) -> bool {
        self.coords(q).iter().all(|c| self.ring.contains(c))
    }

    /// {alpha q alpha^{-1} : q in self}; closure is preserved by conjugation.
    pub fn conjugate_by(&self, alpha: &QuatQ) -> Result<Order> {
        let ainv = alpha.inv()?;
        let mut basis = Vec::with_capacity(4);
        for b in &self.basis {
            basis.push(alpha.mul(b)?.mul(&ainv)?);
        }
        let basis: [QuatQ; 4] = basis.try_into().unwrap();
        Order::new(self.alg.clone(), basis, self.ring)
    }

    /// Intersection of two orders over the same scalar ring, via Hermite forms
    /// on denominator-cleared coordinate stacks. For Z[1/p], coordinates are
    /// p-saturated first (powers of p are ignored).
    pub fn intersect(&self, other: &Order) -> Result<Order> {
        if self.alg.as_ref() != other.alg.as_ref() {
            return Err(Error::AlgebraMismatch);
        }
        if self.ring != other.ring {
            return Err(Error::NotInScalarRing("scalar rings differ".into()));
        }
        let basis = lattice_intersection(&self.basis_vectors(), &other.basis_vectors(), self.ring)?;
        let basis: Vec<QuatQ> = basis
            .into_iter()
            .map(|c| QuatQ::from_rats(&self.alg, c.try_into().unwrap()))
            .collect();
        Order::new(self.alg.clone(), basis.try_into().unwrap(), self.ring)
    }

    fn basis_vectors(&self) -> Vec<Vec<Rat>> {
        self.basis.iter().map(|b| b.coeffs().to_vec()).collect()
    }

    /// Rank-3 generating set for the trace-zero part O_0 = O ∩ V.
    /// Rows of the Hermite form of the coordinate stack with the trace
    /// congruence folded in.
    pub fn trace_zero_part(&self) -> Result<[Vec3Q; 3]> {
        // Solve over the order's own coordinates: an element sum c_i b_i has
        // trace sum c_i trd(b_i) = 0. The trace-zero sublattice of the
        // coordinate lattice is the kernel of the trace functional.
        let traces: Vec<Rat> = self.basis.iter().map(|b| b.trd()).collect();
        // Clear denominators to an integer row vector.
        let den = traces
            .iter()
            .fold(BigInt::one(), |acc, t| num_integer::lcm(acc, t.denom().clone()));
        let ints: Vec<BigInt> = traces
            .iter()
            .map(|t| t.numer() * (&den / t.denom()))
            .collect();
        // Kernel of a 1x4 integer row over Z (p-powers in the trace do not
        // matter for the kernel over Z[1/p]: saturation only rescales rows).
        let mut m = IntMat::zero(1, 4);
        for (j, v) in ints.iter().enumerate() {
            m[(0, j)] = v.clone();
        }
        let kernel = integer_kernel(&m);
        if kernel.rows != 3 {
            return Err(Error::InvariantViolated(format!(
                "trace-zero part has rank {} != 3",
                kernel.rows
            )));
        }
        let mut out = Vec::with_capacity(3);
        for r in 0..3 {
            let mut q = QuatQ::one(&self.alg).scale(&Rat::zero());
            for j in 0..4 {
                let c = Rat::from_bigint(kernel[(r, j)].clone());
                q = q.add(&self.basis[j].scale(&c))?;
            }
            out.push(Vec3Q::from_quat(&q)?);
        }
        Ok(out.try_into().unwrap())
    }
}

fn basis_matrix(basis: &[QuatQ; 4]) -> RatMat {
    // Columns are the coefficient vectors of the basis elements.
    let mut m = RatMat::zero(4, 4);
    for (j, b) in basis.iter().enumerate() {
        let c = b.coeffs();
        for i in 0..4 {
            m[(i, j)] = c[i].clone();
        }
    }
    m
}

/// Kernel of an integer matrix (rows x cols), returned as rows spanning
/// {x in Z^cols : M x^T = 0}.
pub fn integer_kernel(m: &IntMat) -> IntMat {
    // HNF of the transpose stack [M^T | I]: rows of the unimodular transform
    // matching zero rows of H span the kernel.
    let mt = m.transpose();
    let (h, u) = hermite_form(&mt);
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for r in 0..h.rows {
        if h.row(r).iter().all(|v| v.is_zero()) {
            rows.push(u.row(r).to_vec());
        }
    }
    let mut out = IntMat::zero(rows.len(), m.cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = v.clone();
        }
    }
    out
}

/// Intersection of two full-rank lattices given by rational basis vectors,
/// returned as a basis. For Z[1/p], bases are p-saturated (all powers of p
/// stripped from coordinate denominators and numerators per vector).
pub fn lattice_intersection(
    b1: &[Vec<Rat>],
    b2: &[Vec<Rat>],
    ring: ScalarRing,
) -> Result<Vec<Vec<Rat>>> {
    let dim = b1[0].len();
    let saturate = |v: &Vec<Rat>| -> Vec<Rat> {
        match ring {
            ScalarRing::Int => v.clone(),
            ScalarRing::IntInvP(p) => {
                // Strip the p-power content of the whole vector.
                let mut minval: Option<i64> = None;
                for c in v {
                    if let Some(val) = c.val_p(p) {
                        minval = Some(minval.map_or(val, |m: i64| m.min(val)));
                    }
                }
                let shift = minval.unwrap_or(0);
                let f = Rat::from_int(p as i64).pow_i64(-shift);
                v.iter().map(|c| c * &f).collect()
            }
        }
    };
    let b1: Vec<Vec<Rat>> = b1.iter().map(&saturate).collect();
    let b2: Vec<Vec<Rat>> = b2.iter().map(&saturate).collect();
    // Clear denominators jointly: common denominator d, work with integer rows.
    let mut den = BigInt::one();
    for row in b1.iter().chain(b2.iter()) {
        for c in row {
            den = num_integer::lcm(den, c.denom().clone());
        }
    }
    let to_int = |rows: &[Vec<Rat>]| -> IntMat {
        let mut m = IntMat::zero(rows.len(), dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                m[(i, j)] = c.numer() * (&den / c.denom());
            }
        }
        m
    };
    let m1 = to_int(&b1);
    let m2 = to_int(&b2);
    // x in L1 ∩ L2  <=>  x = a^T m1 = b^T m2. Solve a m1 - b m2 = 0: kernel of
    // the stacked transpose. The intersection basis is (kernel a-part) * m1.
    let n1 = m1.rows;
    let mut stack = IntMat::zero(n1 + m2.rows, dim);
    for i in 0..n1 {
        for j in 0..dim {
            stack[(i, j)] = m1[(i, j)].clone();
        }
    }
    for i in 0..m2.rows {
        for j in 0..dim {
            stack[(n1 + i, j)] = -m2[(i, j)].clone();
        }
    }
    let kernel = integer_kernel(&stack.transpose());
    // Rows of `kernel` are (a | b) with a m1 = b m2; collect a m1.
    let mut gens: Vec<Vec<BigInt>> = Vec::new();
    for r in 0..kernel.rows {
        let mut v = vec![BigInt::zero(); dim];
        for i in 0..n1 {
            for (j, vj) in v.iter_mut().enumerate() {
                *vj += &kernel[(r, i)] * &m1[(i, j)];
            }
        }
        gens.push(v);
    }
    let mut gmat = IntMat::zero(gens.len(), dim);
    for (i, row) in gens.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            gmat[(i, j)] = v.clone();
        }
    }
    let (h, _) = hermite_form(&gmat);
    let mut out = Vec::new();
    let denr = Rat::from_bigint(den.clone());
    for r in 0..h.rows {
        if h.row(r).iter().all(|v| v.is_zero()) {
            continue;
        }
        out.push(
            h.row(r)
                .iter()
                .map(|v| Rat::from_bigint(v.clone()) / denr.clone())
                .collect(),
        );
    }
    Ok(out)
}

/// true iff nrd(gamma) = 1 and gamma lies in R over its scalar ring.
pub fn nrd_gamma_check(gamma: &QuatQ, order: &Order) -> bool {
    gamma.nrd().is_one() && order.contains(gamma)
}

/// Matrix of v -> gamma v gamma^{-1} on V in basis (i, j, k). Preserves Q and
/// has determinant 1 (conjugation lands in the special orthogonal group).
pub fn conj_action_matrix(gamma: &QuatQ) -> Result<RatMat> {
    if gamma.nrd().is_zero() {
        return Err(Error::ZeroNorm);
    }
    let alg = &gamma.alg;
    let ginv = gamma.inv()?;
    let mut m = RatMat::zero(3, 3);
    let units = [
        Vec3Q::new(Rat::one(), Rat::zero(), Rat::zero()),
        Vec3Q::new(Rat::zero(), Rat::one(), Rat::zero()),
        Vec3Q::new(Rat::zero(), Rat::zero(), Rat::one()),
    ];
    for (j, e) in units.iter().enumerate() {
        let img = gamma.mul(&e.to_quat(alg))?.mul(&ginv)?;
        let v = Vec3Q::from_quat(&img)?;
        let c = v.coords();
        for i in 0..3 {
            m[(i, j)] = c[i].clone();
        }
    }
    Ok(m)
}

/// Eigendata of a hyperbolic norm-one unit: w+, e, w- with eigenvalues
/// varpi, 1, varpi^{-1}; varpi lives in K = `Q[x]/(x^2 + c)`.
#[derive(Clone, Debug)]
pub struct GammaEigenData {
    pub gamma: QuatQ,
    /// Defining constant of K (x^2 + c = 0, c > 0 squarefree).
    pub c: Rat,
    pub varpi: QuadExt,
    pub w_plus: Vec3K,
    pub e: Vec3Q,
    pub w_minus: Vec3K,
    /// <w+, w-> in K; must be nonzero (a p-adic unit for valid configurations).
    pub pair_pm: QuadExt,
    /// <e, e> in Q; nonzero.
    pub pair_ee: Rat,
    /// ord_p(varpi) = 2t, set once an embedding fixes valuations.
    pub t: Option<u32>,
}

impl GammaEigenData {
    /// Swap the roles of varpi and varpi^{-1} (and w+ with w-). Used by the
    /// p-adic layer to put the positive-valuation eigenvalue first.
    pub fn swapped(&self) -> Self {
        GammaEigenData {
            gamma: self.gamma.clone(),
            c: self.c.clone(),
            varpi: self.varpi.inv().expect("varpi is a unit"),
            w_plus: self.w_minus.clone(),
            e: self.e.clone(),
            w_minus: self.w_plus.clone(),
            pair_pm: self.pair_pm.clone(),
            pair_ee: self.pair_ee.clone(),
            t: self.t,
        }
    }
}

/// Eigendecomposition of the conjugation action of a hyperbolic gamma.
///
/// The characteristic polynomial must factor as (T - 1)(T^2 - s T + 1) with
/// T^2 - s T + 1 irreducible over Q; the quadratic roots are returned over
/// K = `Q[x]/(x^2 + c)` with c the (positive) squarefree part of 4 - s^2.
/// Eigenvectors are normalized so their first nonzero (i,j,k)-coordinate is 1.
/// Which root is called varpi (and hence which vector is w+) is decided later
/// by the p-adic embedding; `swapped()` is the relabeling hook.
pub fn eigendecompose(gamma: &QuatQ) -> Result<GammaEigenData> {
    let m = conj_action_matrix(gamma)?;
    let alg = &gamma.alg;
    let trace = &m[(0, 0)] + &(&m[(1, 1)] + &m[(2, 2)]);
    let s = &trace - &Rat::one();
    // Hyperbolicity over Q: T^2 - sT + 1 irreducible <=> s^2 - 4 not a square.
    let disc = &(&s * &s) - &Rat::from_int(4);
    if disc.is_zero() || disc.sqrt_exact().is_some() {
        return Err(Error::NotHyperbolic(format!(
            "characteristic quadratic T^2 - ({s})T + 1 splits over Q"
        )));
    }
    if disc.is_positive() {
        return Err(Error::NotHyperbolic(
            "conjugation action is not elliptic at infinity (definite case expected)".into(),
        ));
    }
    // disc = -c * beta^2 with c > 0 squarefree: varpi = s/2 + (beta/2) x.
    let c_int = disc.squarefree_part();
    let c = Rat::from_bigint(-c_int);
    if !c.is_positive() {
        return Err(Error::NotHyperbolic("discriminant is not negative".into()));
    }
    let beta2 = disc.clone() / -c.clone();
    let beta = beta2
        .sqrt_exact()
        .expect("squarefree part leaves a perfect square");
    let half = Rat::new(1, 2);
    let varpi = QuadExt::new(c.clone(), &s * &half, &beta * &half);
    // Check varpi * conj(varpi) = 1 (roots of T^2 - sT + 1 have product 1).
    debug_assert_eq!(varpi.norm(), Rat::one());

    // Eigenvector for the eigenvalue 1 over Q.
    let e = {
        let mut m1 = m.clone();
        for i in 0..3 {
            m1[(i, i)] = &m1[(i, i)] - &Rat::one();
        }
        let v = rational_kernel_vector(&m1)?;
        normalize_first_nonzero_rat(&v)
    };

    // Eigenvectors for varpi and its conjugate over K.
    let w1 = kernel_vector_quadext(&m, &varpi)?;
    let w2: Vec3K = Vec3::new(w1.x.conj(), w1.y.conj(), w1.z.conj());
    let pair_pm = w1.pair(&w2, alg);
    if pair_pm.is_zero() {
        return Err(Error::NotHyperbolic(
            "isotropic eigenvectors pair to zero".into(),
        ));
    }
    let pair_ee = e.pair(&e, alg);
    let data = GammaEigenData {
        gamma: gamma.clone(),
        c,
        varpi,
        w_plus: w1,
        e,
        w_minus: w2,
        pair_pm,
        pair_ee,
        t: None,
    };
    // Exact invariants: M w+ = varpi w+, Q(w+) = 0, <w+, e> = 0.
    verify_eigendata(&data)?;
    Ok(data)
}

fn verify_eigendata(d: &GammaEigenData) -> Result<()> {
    let alg = &d.gamma.alg;
    let m = conj_action_matrix(&d.gamma)?;
    let img = apply_mat_quadext(&m, &d.w_plus, &d.c);
    let expect = d.w_plus.scale(&d.varpi);
    if img != expect {
        return Err(Error::InvariantViolated(
            "M w+ != varpi w+ in exact arithmetic".into(),
        ));
    }
    if !d.w_plus.q_value(alg).is_zero() {
        return Err(Error::InvariantViolated("Q(w+) != 0".into()));
    }
    if !d.w_minus.q_value(alg).is_zero() {
        return Err(Error::InvariantViolated("Q(w-) != 0".into()));
    }
    let e_k = d.e.to_quadext(&d.c);
    if !d.w_plus.pair(&e_k, alg).is_zero() || !d.w_minus.pair(&e_k, alg).is_zero() {
        return Err(Error::InvariantViolated("<w±, e> != 0".into()));
    }
    Ok(())
}

pub fn apply_mat_quadext(m: &RatMat, v: &Vec3K, c: &Rat) -> Vec3K {
    let cs = v.coords();
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        let mut acc = QuadExt::zero(c);
        for (j, cj) in cs.iter().enumerate() {
            acc = acc.add(&cj.scale(&m[(i, j)])).unwrap();
        }
        out.push(acc);
    }
    Vec3::new(out[0].clone(), out[1].clone(), out[2].clone())
}

fn rational_kernel_vector(m: &RatMat) -> Result<Vec3Q> {
    // 3x3 rational kernel by elimination; expects rank 2.
    let mut a = m.clone();
    let n = 3usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let Some(p) = (row..n).find(|&i| !a[(i, col)].is_zero()) else {
            continue;
        };
        for j in 0..n {
            let (u, v) = (a[(row, j)].clone(), a[(p, j)].clone());
            a[(row, j)] = v;
            a[(p, j)] = u;
        }
        let inv = a[(row, col)].inv();
        for j in 0..n {
            a[(row, j)] = &a[(row, j)] * &inv;
        }
        for i in 0..n {
            if i != row && !a[(i, col)].is_zero() {
                let f = a[(i, col)].clone();
                for j in 0..n {
                    let t = &f * &a[(row, j)];
                    a[(i, j)] -= t;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    if row != 2 {
        return Err(Error::NotHyperbolic(format!(
            "fixed space has dimension {} != 1",
            n - row
        )));
    }
    let free_col = (0..n)
        .find(|c| !pivots.iter().any(|&(_, pc)| pc == *c))
        .unwrap();
    let mut v = vec![Rat::zero(); n];
    v[free_col] = Rat::one();
    for &(pr, pc) in &pivots {
        v[pc] = -a[(pr, free_col)].clone();
    }
    Ok(Vec3::new(v[0].clone(), v[1].clone(), v[2].clone()))
}

fn normalize_first_nonzero_rat(v: &Vec3Q) -> Vec3Q {
    let c = v.coords();
    let lead = c.iter().find(|x| !x.is_zero()).expect("nonzero vector");
    v.scale(&lead.inv())
}

fn kernel_vector_quadext(m: &RatMat, lambda: &QuadExt) -> Result<Vec3K> {
    let c = &lambda.c;
    let n = 3usize;
    // a = m - lambda I over K
    let mut a: Vec<Vec<QuadExt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = QuadExt::from_rat(c, m[(i, j)].clone());
                    if i == j {
                        e = e.sub(lambda).unwrap();
                    }
                    e
                })
                .collect()
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let Some(p) = (row..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].inv().unwrap();
        for j in 0..n {
            a[row][j] = a[row][j].mul(&inv).unwrap();
        }
        for i in 0..n {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let t = f.mul(&a[row][j]).unwrap();
                    a[i][j] = a[i][j].sub(&t).unwrap();
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    if row != 2 {
        return Err(Error::NotHyperbolic(format!(
            "eigenspace for {lambda} has dimension {} != 1",
            n - row
        )));
    }
    let free_col = (0..n)
        .find(|cidx| !pivots.iter().any(|&(_, pc)| pc == *cidx))
        .unwrap();
    let mut v = vec![QuadExt::zero(c); n];
    v[free_col] = QuadExt::one(c);
    for &(pr, pc) in &pivots {
        v[pc] = a[pr][free_col].neg();
    }
    // Normalize first nonzero coordinate to 1.
    let lead = v.iter().find(|x| !x.is_zero()).unwrap().clone();
    let li = lead.inv().unwrap();
    let v: Vec<QuadExt> = v.into_iter().map(|x| x.mul(&li).unwrap()).collect();
    Ok(Vec3::new(v[0].clone(), v[1].clone(), v[2].clone()))
}

impl<F: FieldElem + fmt::Display> fmt::Display for Quat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) + ({})i + ({})j + ({})k",
            self.t, self.x, self.y, self.z
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{self};

    #[test]
    fn ij_is_k() {
        let alg = sample::algebra();
        let i = Quat::new(&alg, Rat::zero(), Rat::one(), Rat::zero(), Rat::zero());
        let j = Quat::new(&alg, Rat::zero(), Rat::zero(), Rat::one(), Rat::zero());
        let k = Quat::new(&alg, Rat::zero(), Rat::zero(), Rat::zero(), Rat::one());
        assert_eq!(i.mul(&j).unwrap(), k);
        assert_eq!(j.mul(&i).unwrap(), k.neg());
        // i^2 = -2, j^2 = -13
        assert_eq!(i.mul(&i).unwrap().t, Rat::from_int(-2));
        assert_eq!(j.mul(&j).unwrap().t, Rat::from_int(-13));
        // q * 1 = q
        let one = QuatQ::one(&alg);
        let q = Quat::new(&alg, Rat::new(1, 2), Rat::new(-3, 4), Rat::one(), Rat::zero());
        assert_eq!(q.mul(&one).unwrap(), q);
    }

    #[test]
    fn nrd_multiplicative() {
        let alg = sample::algebra();
        let samples = [
            Quat::new(&alg, Rat::new(1, 2), Rat::new(2, 3), Rat::from_int(-1), Rat::new(5, 7)),
            Quat::new(&alg, Rat::from_int(3), Rat::new(-1, 4), Rat::new(1, 6), Rat::from_int(2)),
            Quat::new(&alg, Rat::zero(), Rat::one(), Rat::one(), Rat::one()),
        ];
        for q1 in &samples {
            for q2 in &samples {
                let lhs = q1.mul(q2).unwrap().nrd();
                let rhs = &q1.nrd() * &q2.nrd();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn gamma_in_eichler_order() {
        let rt = sample::maximal_order();
        let alpha = sample::alpha();
        let conj = rt.conjugate_by(&alpha).unwrap();
        let r = rt.intersect(&conj).unwrap();
        let gamma = sample::gamma();
        assert!(nrd_gamma_check(&gamma, &r));
        // 1 passes in any order; i has nrd 2 and fails.
        assert!(nrd_gamma_check(&QuatQ::one(&rt.alg), &r));
        let i = Quat::new(&rt.alg, Rat::zero(), Rat::one(), Rat::zero(), Rat::zero());
        assert!(!nrd_gamma_check(&i, &r));
    }

    #[test]
    fn eichler_intersection_has_level_index() {
        // The level-3 Eichler order R~ ∩ alpha R~ alpha^{-1} has module
        // index 3 in the maximal order (determinant of the coordinate
        // matrix of its basis).
        let rt = sample::maximal_order();
        let conj = rt.conjugate_by(&sample::alpha()).unwrap();
        let r = rt.intersect(&conj).unwrap();
        let mut m = RatMat::zero(4, 4);
        for (j, b) in r.basis.iter().enumerate() {
            let c = rt.coords(b);
            for i in 0..4 {
                m[(i, j)] = c[i].clone();
            }
        }
        assert_eq!(m.det().abs(), Rat::from_int(3));
    }

    #[test]
    fn conjugate_by_one_is_identity() {
        let rt = sample::maximal_order();
        let one = QuatQ::one(&rt.alg);
        let c = rt.conjugate_by(&one).unwrap();
        for b in &c.basis {
            assert!(rt.contains(b));
        }
        for b in &rt.basis {
            assert!(c.contains(b));
        }
    }

    #[test]
    fn trace_zero_of_standard_order() {
        // Order <1, i, j, k>: trace-zero part is spanned by i, j, k.
        let alg = sample::algebra();
        let one = QuatQ::one(&alg);
        let i = Quat::new(&alg, Rat::zero(), Rat::one(), Rat::zero(), Rat::zero());
        let j = Quat::new(&alg, Rat::zero(), Rat::zero(), Rat::one(), Rat::zero());
        let k = Quat::new(&alg, Rat::zero(), Rat::zero(), Rat::zero(), Rat::one());
        let o = Order::new(
            alg.clone(),
            [one, i, j, k],
            ScalarRing::Int,
        )
        .unwrap();
        let tz = o.trace_zero_part().unwrap();
        let m = RatMat::from_rows(
            &tz.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        );
        assert_eq!(m.det().abs(), Rat::one());
    }

    #[test]
    fn second_basis_vector_trace_zero_norm_five() {
        // v = i/4 + j/2 + k/4 lies in the trace-zero part and Q(v) = 5.
        let rt = sample::maximal_order();
        let v = Vec3Q::new(Rat::new(1, 4), Rat::new(1, 2), Rat::new(1, 4));
        assert_eq!(v.q_value(&rt.alg), Rat::from_int(5));
        let tz = sample::maximal_order_trace_zero();
        assert!(tz.contains(&v));
    }

    #[test]
    fn conj_action_preserves_q_and_det_one() {
        let gamma = sample::gamma();
        let m = conj_action_matrix(&gamma).unwrap();
        assert_eq!(m.det(), Rat::one());
        let alg = sample::algebra();
        let v = Vec3Q::new(Rat::new(2, 3), Rat::from_int(-1), Rat::new(5, 4));
        let img = m.mul_vec(&v.coords());
        let img = Vec3Q::new(img[0].clone(), img[1].clone(), img[2].clone());
        assert_eq!(img.q_value(&alg), v.q_value(&alg));
        // gamma = 1 gives the identity.
        let id = conj_action_matrix(&QuatQ::one(&alg)).unwrap();
        assert_eq!(id, RatMat::identity(3));
    }

    #[test]
    fn conj_action_is_multiplicative() {
        let g1 = sample::gamma();
        let g2 = g1.mul(&g1).unwrap();
        let m1 = conj_action_matrix(&g1).unwrap();
        let m2 = conj_action_matrix(&g2).unwrap();
        assert_eq!(m1.mul(&m1), m2);
    }

    #[test]
    fn eigendecompose_matches_printed_data() {
        let gamma = sample::gamma();
        let data = eigendecompose(&gamma).unwrap();
        assert_eq!(data.c, Rat::from_int(5));
        // varpi is one of (-41 ± 12x)/49; both normalizations are allowed
        // before an embedding is fixed.
        let c5 = Rat::from_int(5);
        let v1 = QuadExt::new(c5.clone(), Rat::new(-41, 49), Rat::new(-12, 49));
        assert!(data.varpi == v1 || data.varpi == v1.conj());
        // e = i + 2j + k after first-coordinate normalization.
        assert_eq!(
            data.e,
            Vec3Q::new(Rat::one(), Rat::from_int(2), Rat::one())
        );
        // w± are the printed vectors (in one of the two labelings).
        let wp = sample::w_plus_printed();
        assert!(data.w_plus == wp || data.w_minus == wp);
        // Swapping varpi and varpi^{-1} swaps w+ and w-.
        let sw = data.swapped();
        assert_eq!(sw.w_plus, data.w_minus);
        assert_eq!(sw.varpi.mul(&data.varpi).unwrap(), QuadExt::one(&c5));
    }
}
