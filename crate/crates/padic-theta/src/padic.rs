//! Fixed-precision p-adic arithmetic for odd p: valuation/unit pairs, Hensel
//! lifting of square roots (the embedding K -> Q_p), the Iwasawa branch of the
//! p-adic logarithm (log p = 0), Teichmueller lifts and unit powers u^k for
//! p-adic exponents k.
//!
//! Units are stored as residues mod p^N in a u64; products go through u128.
//! This caps N at the largest power of p below 2^63, which is ample here
//! (results are needed mod small powers of p; the default working precision
//! is N = 12).

use crate::algebra::quadext::QuadExt;
use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Largest N with p^N < 2^63.
pub fn max_precision(p: u64) -> u32 {
    let mut n = 0u32;
    let mut acc: u128 = 1;
    let lim: u128 = 1 << 63;
    loop {
        acc *= p as u128;
        if acc >= lim {
            return n;
        }
        n += 1;
    }
}

pub fn pow_u64(p: u64, n: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..n {
        acc = acc.checked_mul(p).expect("modulus overflow");
    }
    acc
}

/// Arithmetic context mod p^N.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PadicCtx {
    pub p: u64,
    pub n: u32,
    pub modulus: u64,
}

impl PadicCtx {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        assert!(p >= 3 && p % 2 == 1, "p must be an odd prime");
        let max = max_precision(p);
        if n == 0 || n > max {
            return Err(Error::PrecisionTooLarge {
                requested: n,
                max,
                p,
            });
        }
        Ok(PadicCtx {
            p,
            n,
            modulus: pow_u64(p, n),
        })
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let m = self.modulus as u128;
        ((a as u128 + m - b as u128 % m) % m) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit mod p^N.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of a non-unit");
        // Euler: a^{phi(p^N) - 1}
        let phi = self.modulus / self.p * (self.p - 1);
        self.pow(a, phi - 1)
    }

    pub fn reduce_i64(&self, a: i64) -> u64 {
        let m = self.modulus as i128;
        (((a as i128 % m) + m) % m) as u64
    }

    pub fn reduce_bigint(&self, a: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let r = a.mod_floor(&m);
        r.to_u64().expect("reduced residue fits u64")
    }

    /// Reduce a rational with p-coprime denominator.
    pub fn reduce_rat(&self, r: &Rat) -> Result<u64> {
        let num = self.reduce_bigint(r.numer());
        let den = self.reduce_bigint(r.denom());
        if den % self.p == 0 {
            return Err(Error::PrecisionExhausted(format!(
                "denominator of {r} is divisible by p = {}",
                self.p
            )));
        }
        Ok(self.mul(num, self.inv(den)))
    }

    /// v_p of a residue class a mod p^N; None means a ≡ 0 (valuation >= N,
    /// undecidable at this precision).
    pub fn val_of_residue(&self, a: u64) -> Option<(u32, u64)> {
        if a == 0 {
            return None;
        }
        let mut v = 0u32;
        let mut u = a;
        while u % self.p == 0 {
            u /= self.p;
            v += 1;
        }
        Some((v, u))
    }
}

/// A p-adic number: p^valuation * unit, with unit tracked mod p^N.
/// `valuation = None` encodes exact zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PadicNumber {
    pub ctx: PadicCtx,
    /// None for zero.
    pub valuation: Option<i64>,
    /// Unit residue in [1, p^N), coprime to p; 0 for zero.
    pub unit: u64,
}

impl PadicNumber {
    pub fn zero(ctx: PadicCtx) -> Self {
        PadicNumber {
            ctx,
            valuation: None,
            unit: 0,
        }
    }

    pub fn from_unit(ctx: PadicCtx, unit: u64, valuation: i64) -> Self {
        assert!(unit % ctx.p != 0 && unit < ctx.modulus);
        PadicNumber {
            ctx,
            valuation: Some(valuation),
            unit,
        }
    }

    pub fn from_rat(ctx: PadicCtx, r: &Rat) -> Result<Self> {
        if r.is_zero() {
            return Ok(PadicNumber::zero(ctx));
        }
        let (v, u) = r.p_split(ctx.p);
        Ok(PadicNumber::from_unit(ctx, ctx.reduce_rat(&u)?, v))
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    pub fn ord(&self) -> Option<i64> {
        self.valuation
    }

    pub fn mul(&self, other: &PadicNumber) -> PadicNumber {
        assert_eq!(self.ctx, other.ctx);
        match (self.valuation, other.valuation) {
            (Some(v1), Some(v2)) => PadicNumber::from_unit(
                self.ctx,
                self.ctx.mul(self.unit, other.unit),
                v1 + v2,
            ),
            _ => PadicNumber::zero(self.ctx),
        }
    }

    pub fn inv(&self) -> Result<PadicNumber> {
        match self.valuation {
            None => Err(Error::DivisionByZero),
            Some(v) => Ok(PadicNumber::from_unit(
                self.ctx,
                self.ctx.inv(self.unit),
                -v,
            )),
        }
    }
}

/// A fixed embedding `Q[x]/(x^2 + c) -> Q_p` determined by a Hensel-lifted
/// root of x^2 + c. The seed (root mod p) pins the chosen prime above p.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub ctx: PadicCtx,
    pub c: Rat,
    pub seed: u64,
    /// root^2 + c ≡ 0 mod p^N, root ≡ seed mod p.
    pub root: u64,
}

/// Newton iteration lifting seed to a root of x^2 + c mod p^N.
pub fn hensel_root(c: &Rat, p: u64, seed: u64, n: u32) -> Result<Embedding> {
    let ctx = PadicCtx::new(p, n)?;
    let c_red = ctx.reduce_rat(c)?;
    let check = (seed as u128 * seed as u128 + c_red as u128) % p as u128;
    if seed % p == 0 || check != 0 {
        return Err(Error::BadHenselSeed {
            seed,
            c: c.to_string(),
            p,
        });
    }
    // x <- x - (x^2 + c) / (2x), doubling the exact digits each step.
    let mut x = seed % p;
    loop {
        let fx = ctx.add(ctx.mul(x, x), c_red);
        if fx == 0 {
            break;
        }
        let dfx = ctx.add(x, x);
        let step = ctx.mul(fx, ctx.inv(dfx));
        let next = ctx.sub(x, step);
        if next == x {
            break;
        }
        x = next;
    }
    // The loop converges since seed is a simple root mod p (2*seed != 0).
    let fx = ctx.add(ctx.mul(x, x), c_red);
    if fx != 0 {
        return Err(Error::PrecisionExhausted(format!(
            "Newton iteration failed to reach precision {n}"
        )));
    }
    Ok(Embedding {
        ctx,
        c: c.clone(),
        seed: seed % p,
        root: x,
    })
}

impl Embedding {
    /// p-power shift and the two embedded residues of z = p^s (a' + b' x):
    /// (s, a' + b' root, a' - b' root) with a', b' p-integral, s <= 0.
    fn embed_parts(&self, z: &QuadExt) -> Result<(i64, u64, u64)> {
        let p = self.ctx.p;
        let va = z.a.val_p(p);
        let vb = z.b.val_p(p);
        let s = match (va, vb) {
            (Some(va), Some(vb)) => va.min(vb).min(0),
            (Some(va), None) => va.min(0),
            (None, Some(vb)) => vb.min(0),
            (None, None) => unreachable!("z != 0"),
        };
        let f = Rat::from_int(p as i64).pow_i64(-s);
        let a = self.ctx.reduce_rat(&(&z.a * &f))?;
        let b = self.ctx.reduce_rat(&(&z.b * &f))?;
        let broot = self.ctx.mul(b, self.root);
        Ok((s, self.ctx.add(a, broot), self.ctx.sub(a, broot)))
    }

    /// Image of z = a + b x as a p-adic number with exact valuation.
    /// Raises a precision error when the unit digits are lost (valuation of
    /// the cleared element within guard range of N); callers then raise N.
    pub fn embed(&self, z: &QuadExt) -> Result<PadicNumber> {
        if z.c != self.c {
            return Err(Error::QuadExtMismatch(
                z.c.to_string(),
                self.c.to_string(),
            ));
        }
        if z.is_zero() {
            return Ok(PadicNumber::zero(self.ctx));
        }
        let (s, res, _) = self.embed_parts(z)?;
        match self.ctx.val_of_residue(res) {
            Some((v, u)) => Ok(PadicNumber::from_unit(self.ctx, u, v as i64 + s)),
            None => Err(Error::PrecisionExhausted(format!(
                "embed({z}): valuation >= precision {}",
                self.ctx.n
            ))),
        }
    }

    /// Exact p-adic valuation of z under this embedding. When the direct
    /// residue vanishes mod p^N, the valuation is still decided through the
    /// conjugate residue and v_p(norm z) = v(z) + v(conj z); only if both
    /// residues vanish is the precision raised (always terminates: the
    /// valuations are finite and bounded by v_p(norm)).
    pub fn val_exact(&self, z: &QuadExt) -> Result<Option<i64>> {
        if z.is_zero() {
            return Ok(None);
        }
        if z.c != self.c {
            return Err(Error::QuadExtMismatch(
                z.c.to_string(),
                self.c.to_string(),
            ));
        }
        let (s, res, res_conj) = self.embed_parts(z)?;
        if let Some((v, _)) = self.ctx.val_of_residue(res) {
            return Ok(Some(v as i64 + s));
        }
        let vnorm = z
            .norm()
            .val_p(self.ctx.p)
            .expect("nonzero element has nonzero norm");
        if let Some((vc, _)) = self.ctx.val_of_residue(res_conj) {
            // v(z) = v_p(norm) - v(conj z), and v(conj z) = s + vc.
            return Ok(Some(vnorm - (s + vc as i64)));
        }
        let max = max_precision(self.ctx.p);
        if self.ctx.n >= max {
            return Err(Error::PrecisionExhausted(format!(
                "val_exact({z}) undecidable at the maximum precision {max}"
            )));
        }
        let e = hensel_root(&self.c, self.ctx.p, self.seed, (self.ctx.n * 2).min(max))?;
        e.val_exact(z)
    }
}

/// Iwasawa logarithm: the branch with log p = 0. The valuation component is
/// discarded; for the unit part u, log(u) = log(u^{p-1}) / (p-1) with the
/// usual series in t = u^{p-1} - 1 (v(t) >= 1).
///
/// The result is exact mod p^{N - floor(log_p N) adjustments}; precision loss
/// from dividing term n by v_p(n) is accounted for by truncating the series
/// where terms fall below the modulus.
pub fn iwasawa_log(u: &PadicNumber) -> PadicNumber {
    let ctx = u.ctx;
    if u.is_zero() {
        // log of 0 is not defined; by convention the branch kills p-powers and
        // callers never pass zero. Return zero defensively is wrong; panic.
        panic!("iwasawa_log of zero");
    }
    log_of_unit(ctx, u.unit)
}

/// log of a unit residue mod p^N, as a PadicNumber (possibly zero).
pub fn log_of_unit(ctx: PadicCtx, unit: u64) -> PadicNumber {
    let t = ctx.sub(ctx.pow(unit, ctx.p - 1), 1);
    // series sum_{k>=1} (-1)^{k+1} t^k / k, then divide by (p-1)
    let (sum_unit, ok) = log1p_series(ctx, t);
    if !ok {
        return PadicNumber::zero(ctx);
    }
    let inv_pm1 = ctx.inv(ctx.p - 1);
    let s = ctx.mul(sum_unit, inv_pm1);
    match ctx.val_of_residue(s) {
        Some((v, un)) => PadicNumber::from_unit(ctx, un, v as i64),
        None => PadicNumber::zero(ctx),
    }
}

/// Reciprocal table: inverses of the units among 1..=upto mod p^N (zero at
/// non-unit indices). Removes the per-term inversions from series loops.
pub fn reciprocal_table(ctx: PadicCtx, upto: u64) -> Vec<u64> {
    let mut t = vec![0u64; (upto + 1) as usize];
    for (k, slot) in t.iter_mut().enumerate().skip(1) {
        if k as u64 % ctx.p != 0 {
            *slot = ctx.inv(k as u64 % ctx.modulus);
        }
    }
    t
}

/// Residue of the Iwasawa log of a unit, with a caller-supplied reciprocal
/// table covering at least 4N + 8 indices. Equals `log_of_unit(ctx, u)` as a
/// residue; this is the hot-loop variant.
pub fn log_unit_residue(ctx: PadicCtx, u: u64, recips: &[u64]) -> u64 {
    let t = ctx.sub(ctx.pow(u, ctx.p - 1), 1);
    if t == 0 {
        return 0;
    }
    let vt = ctx.val_of_residue(t).map(|(v, _)| v).unwrap_or(ctx.n);
    let mut acc: u64 = 0;
    let mut tk = 1u64;
    let mut k = 1u64;
    loop {
        if (k as u128) * (vt as u128) >= (ctx.n as u128 + 32) {
            break;
        }
        tk = ctx.mul(tk, t);
        let mut kk = k;
        let mut term = tk;
        while kk % ctx.p == 0 {
            kk /= ctx.p;
            debug_assert!(term % ctx.p == 0);
            term /= ctx.p;
        }
        term = ctx.mul(term, recips[kk as usize]);
        if k % 2 == 0 {
            acc = ctx.sub(acc, term);
        } else {
            acc = ctx.add(acc, term);
        }
        k += 1;
        if k > 4 * ctx.n as u64 + 8 {
            break;
        }
    }
    ctx.mul(acc, recips[(ctx.p - 1) as usize])
}

/// sum_{k>=1} (-1)^{k+1} t^k / k mod p^N for v_p(t) >= 1. Terms with k such
/// that k*v(t) - v_p(k) >= N vanish; k stays below p^N so denominators are
/// handled by unit inversion after stripping p-powers.
fn log1p_series(ctx: PadicCtx, t: u64) -> (u64, bool) {
    if t == 0 {
        return (0, true);
    }
    let vt = ctx.val_of_residue(t).map(|(v, _)| v).unwrap_or(ctx.n);
    assert!(vt >= 1, "log series requires t ≡ 0 mod p");
    let mut acc: u64 = 0;
    let mut tk = 1u64; // t^k
    let mut k = 1u64;
    loop {
        if (k as u128) * (vt as u128) >= (ctx.n as u128 + 32) {
            break;
        }
        tk = ctx.mul(tk, t);
        // term = t^k / k: strip p-part of k, divide by the unit, shift val.
        let mut kk = k;
        let mut kval = 0u32;
        while kk % ctx.p == 0 {
            kk /= ctx.p;
            kval += 1;
        }
        // t^k has valuation >= k*vt >= kval + 1 for p odd, so division is safe.
        let mut term = tk;
        for _ in 0..kval {
            debug_assert!(term % ctx.p == 0);
            term /= ctx.p;
            // dividing a residue by p loses one digit; safe since the lost
            // digits are beyond the tracked precision of the sum
        }
        term = ctx.mul(term, ctx.inv(kk % ctx.modulus));
        if k % 2 == 0 {
            acc = ctx.sub(acc, term);
        } else {
            acc = ctx.add(acc, term);
        }
        k += 1;
        if k > 4 * ctx.n as u64 + 8 {
            break;
        }
    }
    (acc, true)
}

/// exp(x) for v_p(x) >= 1 (p odd), as a residue mod p^N.
pub fn exp_series(ctx: PadicCtx, x: u64) -> u64 {
    if x == 0 {
        return 1;
    }
    let vx = ctx.val_of_residue(x).map(|(v, _)| v).unwrap_or(ctx.n);
    assert!(vx >= 1, "exp series requires v_p(x) >= 1");
    let mut acc = 1u64;
    let mut xk = 1u64;
    let mut kfact_val = 0u32; // v_p(k!)
    let mut kfact_unit = 1u64; // unit part of k!
    let mut k = 1u64;
    loop {
        if (k as u128) * (vx as u128) >= (ctx.n as u128 + (kfact_val as u128) + 16) {
            break;
        }
        xk = ctx.mul(xk, x);
        let mut kk = k;
        while kk % ctx.p == 0 {
            kk /= ctx.p;
            kfact_val += 1;
        }
        kfact_unit = ctx.mul(kfact_unit, kk % ctx.modulus);
        // term = x^k / k!: valuation k*vx - v_p(k!) > 0 for p odd.
        let mut term = xk;
        for _ in 0..kfact_val {
            debug_assert!(term % ctx.p == 0);
            term /= ctx.p;
        }
        term = ctx.mul(term, ctx.inv(kfact_unit));
        acc = ctx.add(acc, term);
        k += 1;
        if k > 8 * ctx.n as u64 + 16 {
            break;
        }
    }
    acc
}

/// Teichmueller lift: the unique (p-1)-st root of unity congruent to u mod p.
pub fn teichmuller(ctx: PadicCtx, u: u64) -> u64 {
    assert!(u % ctx.p != 0);
    // Iterate x -> x^p; converges to the Teichmueller representative.
    let mut x = u % ctx.modulus;
    for _ in 0..ctx.n + 2 {
        x = ctx.pow(x, ctx.p);
    }
    x
}

/// Weight-space exponent: a pair (k0 mod p-1, k1 in Z_p given mod p^N).
/// Classical integer weights k map to (k mod p-1, k).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicExponent {
    pub k0: u64,
    pub k1: u64,
}

impl PadicExponent {
    pub fn from_integer(k: u64, ctx: PadicCtx) -> Self {
        PadicExponent {
            k0: k % (ctx.p - 1),
            k1: k % ctx.modulus,
        }
    }
}

/// `u^k = omega(u)^{k0} * exp(k1 * log <u>)`, where omega is the Teichmueller
/// character and `<u> = u / omega(u)`. Agrees with iterated multiplication for
/// integer exponents.
pub fn unit_power(ctx: PadicCtx, u: u64, k: PadicExponent) -> u64 {
    assert!(u % ctx.p != 0, "unit_power of a non-unit");
    let omega = teichmuller(ctx, u);
    let principal = ctx.mul(u, ctx.inv(omega));
    let logu = {
        let t = ctx.sub(principal, 1);
        let (s, _) = log1p_series(ctx, t);
        s
    };
    let head = ctx.pow(omega, k.k0);
    let tail = exp_series(ctx, ctx.mul(k.k1, logu));
    ctx.mul(head, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: u32) -> PadicCtx {
        PadicCtx::new(7, n).unwrap()
    }

    #[test]
    fn hensel_lift_known_digits() {
        // Root of x^2 + 5 over Z_7 with seed 3: 17 mod 49, 311 mod 343,
        // verified by direct squaring.
        let e2 = hensel_root(&Rat::from_int(5), 7, 3, 2).unwrap();
        assert_eq!(e2.root, 17);
        assert_eq!((17u64 * 17 + 5) % 49, 0);
        let e3 = hensel_root(&Rat::from_int(5), 7, 3, 3).unwrap();
        assert_eq!(e3.root, 311);
        assert_eq!((311u64 * 311 + 5) % 343, 0);
        // Seed 0 is rejected.
        assert!(hensel_root(&Rat::from_int(5), 7, 0, 2).is_err());
        // Root persists under precision raise.
        let e8 = hensel_root(&Rat::from_int(5), 7, 3, 8).unwrap();
        let m = e8.ctx.modulus;
        assert_eq!((e8.root as u128 * e8.root as u128 + 5) % m as u128, 0);
        assert_eq!(e8.root % 343, 311);
    }

    #[test]
    fn embed_basics_and_varpi_valuation() {
        let e = hensel_root(&Rat::from_int(5), 7, 3, 12).unwrap();
        let one = QuadExt::one(&Rat::from_int(5));
        let im = e.embed(&one).unwrap();
        assert_eq!(im.valuation, Some(0));
        assert_eq!(im.unit, 1);
        // varpi = -12x/49 - 41/49 has valuation 2 under seed 3, and its
        // conjugate has valuation -2 (norm 1 forces opposite valuations).
        let varpi = QuadExt::new(Rat::from_int(5), Rat::new(-41, 49), Rat::new(-12, 49));
        assert_eq!(e.embed(&varpi).unwrap().valuation, Some(2));
        assert_eq!(e.embed(&varpi.conj()).unwrap().valuation, Some(-2));
        assert_eq!(e.val_exact(&varpi).unwrap(), Some(2));
    }

    #[test]
    fn valuation_additivity() {
        let c = ctx(10);
        let a = PadicNumber::from_rat(c, &Rat::new(98, 3)).unwrap();
        let b = PadicNumber::from_rat(c, &Rat::new(5, 49)).unwrap();
        let prod = a.mul(&b);
        assert_eq!(
            prod.valuation.unwrap(),
            a.valuation.unwrap() + b.valuation.unwrap()
        );
    }

    #[test]
    fn iwasawa_log_kills_p_and_roots_of_unity() {
        let c = ctx(10);
        // log_p(p) = 0: p has unit part 1.
        let p = PadicNumber::from_rat(c, &Rat::from_int(7)).unwrap();
        assert!(iwasawa_log(&p).is_zero());
        let one = PadicNumber::from_rat(c, &Rat::one()).unwrap();
        assert!(iwasawa_log(&one).is_zero());
        // log(omega(u)) = 0 for Teichmueller lifts.
        for u in [2u64, 3, 5, 6] {
            let om = teichmuller(c, u);
            assert_eq!(c.pow(om, 6), 1);
            let x = PadicNumber::from_unit(c, om, 0);
            assert!(iwasawa_log(&x).is_zero());
        }
    }

    #[test]
    fn log_is_a_homomorphism() {
        let c = ctx(9);
        // Check log(uv) = log u + log v mod p^{N-1} on a unit sample.
        let us = [2u64, 10, 45, 100, 2401 + 3, 13];
        for &u in &us {
            for &v in &us {
                let lu = log_of_unit(c, u % c.modulus);
                let lv = log_of_unit(c, v % c.modulus);
                let luv = log_of_unit(c, c.mul(u % c.modulus, v % c.modulus));
                let lhs = residue_of(&luv, c);
                let rhs = c.add(residue_of(&lu, c), residue_of(&lv, c));
                // compare mod p^{N-1}
                let m = c.modulus / c.p;
                assert_eq!(lhs % m, rhs % m, "u={u} v={v}");
            }
        }
    }

    fn residue_of(x: &PadicNumber, c: PadicCtx) -> u64 {
        match x.valuation {
            None => 0,
            Some(v) => {
                assert!(v >= 0);
                let mut r = x.unit;
                for _ in 0..v {
                    r = c.mul(r, c.p);
                }
                r
            }
        }
    }

    #[test]
    fn unit_power_matches_iterated_multiplication() {
        // Integer exponents agree with iterated multiplication up to the
        // series slack (two digits at these sizes).
        let c = ctx(8);
        let slack_mod = pow_u64(7, 6);
        let u = 10u64;
        // k = 0 gives 1 exactly
        assert_eq!(unit_power(c, u, PadicExponent { k0: 0, k1: 0 }), 1);
        for k in [1u64, 6, 29, 48] {
            let kk = PadicExponent::from_integer(k, c);
            assert_eq!(
                unit_power(c, u, kk) % slack_mod,
                c.pow(u, k) % slack_mod,
                "k = {k}"
            );
        }
    }

    #[test]
    fn unit_power_addition_law() {
        let c = ctx(8);
        let u = 12u64;
        let k1 = PadicExponent::from_integer(5, c);
        let k2 = PadicExponent::from_integer(9, c);
        let ksum = PadicExponent::from_integer(14, c);
        let lhs = unit_power(c, u, ksum);
        let rhs = c.mul(unit_power(c, u, k1), unit_power(c, u, k2));
        let m = c.modulus / c.p; // slack of one digit
        assert_eq!(lhs % m, rhs % m);
    }

    #[test]
    fn unit_power_finite_difference_is_log() {
        // (u^eps - 1)/eps ≡ log u mod p^m for eps = p^m; after dividing the
        // residue by p^m there are N - m - 2 trustworthy digits, so keep
        // m <= (N - 2) / 2.
        let c = ctx(12);
        let u = 10u64;
        for m in [2u32, 3, 4] {
            let eps = pow_u64(7, m);
            let k = PadicExponent { k0: 0, k1: eps };
            let ueps = unit_power(c, u, k);
            let diff = c.sub(ueps, 1);
            let mut d = diff;
            for _ in 0..m {
                assert_eq!(d % 7, 0);
                d /= 7;
            }
            let logu = residue_of(&log_of_unit(c, u), c);
            let modulus = pow_u64(7, m);
            assert_eq!(d % modulus, logu % modulus, "m={m}");
        }
    }
}
