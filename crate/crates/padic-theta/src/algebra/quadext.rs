//! The imaginary quadratic extension K = `Q[x]/(x^2 + c)`, c a positive rational.
//!
//! Elements are a + b*x with the defining relation x^2 = -c. Conjugation sends
//! x to -x; norm(z) = z * conj(z) = a^2 + c*b^2.

use super::rational::Rat;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    /// Defining constant: x^2 + c = 0, c > 0.
    pub c: Rat,
    pub a: Rat,
    pub b: Rat,
}

impl QuadExt {
    pub fn new(c: Rat, a: Rat, b: Rat) -> Self {
        assert!(c.is_positive(), "QuadExt requires x^2 + c with c > 0");
        QuadExt { c, a, b }
    }

    pub fn from_rat(c: &Rat, a: Rat) -> Self {
        QuadExt::new(c.clone(), a, Rat::zero())
    }

    pub fn zero(c: &Rat) -> Self {
        QuadExt::from_rat(c, Rat::zero())
    }

    pub fn one(c: &Rat) -> Self {
        QuadExt::from_rat(c, Rat::one())
    }

    /// The generator x itself.
    pub fn gen(c: &Rat) -> Self {
        QuadExt::new(c.clone(), Rat::zero(), Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt::new(self.c.clone(), self.a.clone(), -self.b.clone())
    }

    /// norm(a + bx) = a^2 + c b^2.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a + &(&self.c * &self.b) * &self.b
    }

    pub fn trace(&self) -> Rat {
        Rat::from_int(2) * self.a.clone()
    }

    fn check_same_field(&self, other: &QuadExt) -> Result<()> {
        if self.c != other.c {
            return Err(Error::QuadExtMismatch(
                self.c.to_string(),
                other.c.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &QuadExt) -> Result<QuadExt> {
        self.check_same_field(other)?;
        Ok(QuadExt::new(
            self.c.clone(),
            &self.a + &other.a,
            &self.b + &other.b,
        ))
    }

    pub fn sub(&self, other: &QuadExt) -> Result<QuadExt> {
        self.check_same_field(other)?;
        Ok(QuadExt::new(
            self.c.clone(),
            &self.a - &other.a,
            &self.b - &other.b,
        ))
    }

    /// Product under x^2 = -c.
    pub fn mul(&self, other: &QuadExt) -> Result<QuadExt> {
        self.check_same_field(other)?;
        let a = &(&self.a * &other.a) - &(&self.c * &(&self.b * &other.b));
        let b = &(&self.a * &other.b) + &(&self.b * &other.a);
        Ok(QuadExt::new(self.c.clone(), a, b))
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt::new(self.c.clone(), -self.a.clone(), -self.b.clone())
    }

    pub fn scale(&self, r: &Rat) -> QuadExt {
        QuadExt::new(self.c.clone(), r * &self.a, r * &self.b)
    }

    pub fn inv(&self) -> Result<QuadExt> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(self.conj().scale(&n.inv()))
    }

    pub fn div(&self, other: &QuadExt) -> Result<QuadExt> {
        self.mul(&other.inv()?)
    }
}

/// Convenience for exact arithmetic on quadext-or-rational scalars used by the
/// quaternion layer: both `Rat` and `QuadExt` implement this.
pub trait FieldElem: Clone + PartialEq + fmt::Debug {
    fn f_zero(&self) -> Self;
    fn f_one(&self) -> Self;
    fn f_add(&self, other: &Self) -> Self;
    fn f_sub(&self, other: &Self) -> Self;
    fn f_mul(&self, other: &Self) -> Self;
    fn f_neg(&self) -> Self;
    fn f_inv(&self) -> Self;
    fn f_is_zero(&self) -> bool;
    fn f_from_rat(&self, r: &Rat) -> Self;
}

impl FieldElem for Rat {
    fn f_zero(&self) -> Self {
        Rat::zero()
    }
    fn f_one(&self) -> Self {
        Rat::one()
    }
    fn f_add(&self, other: &Self) -> Self {
        self + other
    }
    fn f_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn f_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn f_neg(&self) -> Self {
        -self.clone()
    }
    fn f_inv(&self) -> Self {
        self.inv()
    }
    fn f_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn f_from_rat(&self, r: &Rat) -> Self {
        r.clone()
    }
}

impl FieldElem for QuadExt {
    fn f_zero(&self) -> Self {
        QuadExt::zero(&self.c)
    }
    fn f_one(&self) -> Self {
        QuadExt::one(&self.c)
    }
    fn f_add(&self, other: &Self) -> Self {
        self.add(other).expect("field mismatch")
    }
    fn f_sub(&self, other: &Self) -> Self {
        self.sub(other).expect("field mismatch")
    }
    fn f_mul(&self, other: &Self) -> Self {
        self.mul(other).expect("field mismatch")
    }
    fn f_neg(&self) -> Self {
        self.neg()
    }
    fn f_inv(&self) -> Self {
        self.inv().expect("inverse of zero")
    }
    fn f_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn f_from_rat(&self, r: &Rat) -> Self {
        QuadExt::from_rat(&self.c, r.clone())
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*x", self.b)
        } else {
            write!(f, "{} + {}*x", self.a, self.b)
        }
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> Rat {
        Rat::from_int(5)
    }

    #[test]
    fn defining_relation() {
        // x * x = -5 for x^2 + 5 = 0
        let x = QuadExt::gen(&c5());
        let xx = x.mul(&x).unwrap();
        assert_eq!(xx, QuadExt::from_rat(&c5(), Rat::from_int(-5)));
    }

    #[test]
    fn varpi_has_norm_one() {
        // (-12x/49 - 41/49) * (12x/49 - 41/49) = 1
        let varpi = QuadExt::new(c5(), Rat::new(-41, 49), Rat::new(-12, 49));
        let prod = varpi.mul(&varpi.conj()).unwrap();
        assert_eq!(prod, QuadExt::one(&c5()));
        assert_eq!(varpi.norm(), Rat::one());
    }

    #[test]
    fn identity_and_mismatch() {
        let z = QuadExt::new(c5(), Rat::new(3, 7), Rat::new(-2, 9));
        assert_eq!(z.mul(&QuadExt::one(&c5())).unwrap(), z);
        let other = QuadExt::gen(&Rat::from_int(3));
        assert!(z.mul(&other).is_err());
    }

    #[test]
    fn inverse() {
        let z = QuadExt::new(c5(), Rat::new(2, 3), Rat::new(-1, 4));
        let w = z.inv().unwrap();
        assert_eq!(z.mul(&w).unwrap(), QuadExt::one(&c5()));
    }
}
