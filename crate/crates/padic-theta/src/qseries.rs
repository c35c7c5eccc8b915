//! Truncated q-expansions a_1 .. a_bound (a_0 tracked separately) over exact
//! integers, quadratic-field elements, or Z/p^N. Every series knows its
//! trustworthy bound; linear combinations take the minimum and the U operator
//! at p^2 divides the bound by p^2. Operators never fabricate coefficients
//! beyond the bound.

use crate::algebra::quadext::QuadExt;
use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use crate::padic::PadicCtx;
use std::fmt;
use std::io::Write;

/// Coefficient ring interface for truncated q-series.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale_i64(&self, k: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// String form for CSV cells (canonical: integers, or residues in
    /// [0, p^N)).
    fn cell(&self) -> String;
}

impl Coeff for i64 {
    fn add(&self, other: &Self) -> Self {
        self.checked_add(*other).expect("i64 coefficient overflow")
    }
    fn sub(&self, other: &Self) -> Self {
        self.checked_sub(*other).expect("i64 coefficient overflow")
    }
    fn scale_i64(&self, k: i64) -> Self {
        self.checked_mul(k).expect("i64 coefficient overflow")
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Coeff for Rat {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale_i64(&self, k: i64) -> Self {
        self * &Rat::from_int(k)
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Coeff for QuadExt {
    fn add(&self, other: &Self) -> Self {
        QuadExt::add(self, other).expect("field mismatch")
    }
    fn sub(&self, other: &Self) -> Self {
        QuadExt::sub(self, other).expect("field mismatch")
    }
    fn scale_i64(&self, k: i64) -> Self {
        self.scale(&Rat::from_int(k))
    }
    fn is_zero(&self) -> bool {
        QuadExt::is_zero(self)
    }
    fn cell(&self) -> String {
        self.to_string()
    }
}

/// Residue in Z/p^N, canonical representative in [0, p^N).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ModP {
    pub ctx: PadicCtx,
    pub value: u64,
}

impl ModP {
    pub fn new(ctx: PadicCtx, value: u64) -> Self {
        ModP {
            ctx,
            value: value % ctx.modulus,
        }
    }

    pub fn zero(ctx: PadicCtx) -> Self {
        ModP { ctx, value: 0 }
    }

    pub fn mul(&self, other: &ModP) -> ModP {
        assert_eq!(self.ctx, other.ctx);
        ModP::new(self.ctx, self.ctx.mul(self.value, other.value))
    }

    /// Exact division by p: value must be divisible by p; precision drops by
    /// one digit (the caller owns the bookkeeping of N).
    pub fn div_p(&self) -> Result<ModP> {
        if self.value % self.ctx.p != 0 {
            return Err(Error::InvariantViolated(format!(
                "{} is not divisible by p = {}",
                self.value, self.ctx.p
            )));
        }
        let ctx = PadicCtx::new(self.ctx.p, self.ctx.n - 1)?;
        Ok(ModP::new(ctx, self.value / self.ctx.p))
    }

    pub fn reduce_to(&self, n: u32) -> Result<ModP> {
        let ctx = PadicCtx::new(self.ctx.p, n)?;
        Ok(ModP::new(ctx, self.value % ctx.modulus))
    }
}

impl Coeff for ModP {
    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "mixed moduli");
        ModP::new(self.ctx, self.ctx.add(self.value, other.value))
    }
    fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.ctx, other.ctx, "mixed moduli");
        ModP::new(self.ctx, self.ctx.sub(self.value, other.value))
    }
    fn scale_i64(&self, k: i64) -> Self {
        ModP::new(self.ctx, self.ctx.mul(self.value, self.ctx.reduce_i64(k)))
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    fn cell(&self) -> String {
        self.value.to_string()
    }
}

/// Truncated q-expansion: a_n for 1 <= n <= bound, plus a_0.
#[derive(Clone, PartialEq, Debug)]
pub struct QSeries<C: Coeff> {
    pub a0: C,
    /// coeffs[n - 1] = a_n.
    pub coeffs: Vec<C>,
}

impl<C: Coeff> QSeries<C> {
    pub fn new(a0: C, coeffs: Vec<C>) -> Self {
        QSeries { a0, coeffs }
    }

    pub fn zero_to(zero: C, bound: u64) -> Self {
        QSeries {
            a0: zero.clone(),
            coeffs: vec![zero; bound as usize],
        }
    }

    pub fn bound(&self) -> u64 {
        self.coeffs.len() as u64
    }

    pub fn coeff(&self, n: u64) -> Option<&C> {
        if n == 0 {
            Some(&self.a0)
        } else {
            self.coeffs.get((n - 1) as usize)
        }
    }

    pub fn coeff_checked(&self, n: u64) -> Result<&C> {
        self.coeff(n).ok_or(Error::InsufficientBound {
            have: self.bound(),
            need: n,
        })
    }

    pub fn set(&mut self, n: u64, v: C) {
        if n == 0 {
            self.a0 = v;
        } else {
            self.coeffs[(n - 1) as usize] = v;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a0.is_zero() && self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, bound: u64) -> QSeries<C> {
        let mut c = self.coeffs.clone();
        c.truncate(bound as usize);
        QSeries {
            a0: self.a0.clone(),
            coeffs: c,
        }
    }

    /// Indices n <= bound with a_n nonzero.
    pub fn support(&self) -> Vec<u64> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }
}

/// Integer-linear combination; the result bound is the minimum of the inputs.
pub fn series_combine<C: Coeff>(terms: &[(i64, &QSeries<C>)]) -> Result<QSeries<C>> {
    if terms.is_empty() {
        return Err(Error::RingMismatch("empty combination".into()));
    }
    let bound = terms.iter().map(|(_, s)| s.bound()).min().unwrap();
    let zero_like = terms[0].1.a0.scale_i64(0);
    let mut out = QSeries::zero_to(zero_like, bound);
    for (k, s) in terms {
        out.a0 = out.a0.add(&s.a0.scale_i64(*k));
        for n in 1..=bound {
            let v = out.coeff(n).unwrap().add(&s.coeff(n).unwrap().scale_i64(*k));
            out.set(n, v);
        }
    }
    Ok(out)
}

/// CSV serialization: header "n,a_n", one row per index 0..=bound.
pub fn write_csv<C: Coeff, W: Write>(s: &QSeries<C>, w: &mut W) -> Result<()> {
    writeln!(w, "n,a_n")?;
    writeln!(w, "0,{}", s.a0.cell())?;
    for n in 1..=s.bound() {
        writeln!(w, "{},{}", n, s.coeff(n).unwrap().cell())?;
    }
    Ok(())
}

/// JSON serialization: {"a0": ..., "coeffs": [...]} with cells as strings
/// (p-adic residues as canonical integers in [0, p^N)).
pub fn to_json<C: Coeff>(s: &QSeries<C>) -> serde_json::Value {
    serde_json::json!({
        "a0": s.a0.cell(),
        "bound": s.bound(),
        "coeffs": s.coeffs.iter().map(|c| c.cell()).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_cancels() {
        let f = QSeries::new(0i64, vec![1, 2, 3, 4]);
        let z = series_combine(&[(1, &f), (-1, &f)]).unwrap();
        assert!(z.is_zero());
        let id = series_combine(&[(1, &f)]).unwrap();
        assert_eq!(id, f);
    }

    #[test]
    fn bound_is_minimum() {
        let f = QSeries::new(0i64, vec![1, 2, 3, 4]);
        let g = QSeries::new(0i64, vec![1, 1]);
        let h = series_combine(&[(1, &f), (1, &g)]).unwrap();
        assert_eq!(h.bound(), 2);
        assert_eq!(*h.coeff(2).unwrap(), 3);
        assert!(h.coeff(3).is_none());
        assert!(matches!(
            h.coeff_checked(3),
            Err(Error::InsufficientBound { have: 2, need: 3 })
        ));
    }

    #[test]
    fn csv_and_json_serialization() {
        let ctx = PadicCtx::new(7, 2).unwrap();
        let mut f = QSeries::zero_to(ModP::zero(ctx), 3);
        f.set(1, ModP::new(ctx, 5));
        f.set(3, ModP::new(ctx, 48));
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,a_n\n0,0\n1,5\n2,0\n3,48\n");
        let j = to_json(&f);
        assert_eq!(j["bound"], 3);
        assert_eq!(j["coeffs"][2], "48");
    }

    #[test]
    fn modp_cells_are_canonical() {
        let ctx = PadicCtx::new(7, 2).unwrap();
        let x = ModP::new(ctx, 50);
        assert_eq!(x.value, 1);
        assert_eq!(x.cell(), "1");
        let y = x.scale_i64(-1);
        assert_eq!(y.value, 48);
    }
}
