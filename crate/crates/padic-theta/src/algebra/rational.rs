//! Arbitrary-precision rationals, always stored reduced with positive denominator.
//!
//! Thin wrapper around `num_rational::BigRational` adding the p-adic helpers the
//! lattice and embedding layers need (valuations, p-parts, squarefree parts).

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Exact rational number. gcd(|num|, den) = 1 and den >= 1 always hold
/// (maintained by `BigRational`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(pub BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_parts(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        Rat(self.0.recip())
    }

    pub fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Exact p-adic valuation. `None` encodes +infinity (the value zero).
    pub fn val_p(&self, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = BigInt::from(p);
        Some(int_val_p(self.numer(), &p) - int_val_p(self.denom(), &p))
    }

    /// Write self = p^v * u with u a p-unit; returns (v, u).
    pub fn p_split(&self, p: u64) -> (i64, Rat) {
        let v = self.val_p(p).expect("p_split of zero");
        let pw = Rat::from_bigint(BigInt::from(p)).pow_i64(v);
        (v, self.clone() / pw)
    }

    pub fn pow_i64(&self, e: i64) -> Self {
        if e == 0 {
            return Rat::one();
        }
        let base = if e > 0 { self.clone() } else { self.inv() };
        let mut acc = Rat::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }

    /// For a nonzero rational r, the squarefree integer s with r = s * (square),
    /// with sign carried along. Factors by trial division; config-scale inputs only.
    pub fn squarefree_part(&self) -> BigInt {
        assert!(!self.is_zero());
        let n = self.numer() * self.denom();
        let (sign, mag) = (n.sign(), n.magnitude().clone());
        let mut s = BigUint::one();
        let mut m = mag;
        let mut d = BigUint::from(2u32);
        while &d * &d <= m {
            let mut e = 0u32;
            while (&m % &d).is_zero() {
                m /= &d;
                e += 1;
            }
            if e % 2 == 1 {
                s *= &d;
            }
            d += 1u32;
        }
        s *= m; // remaining factor is prime, exponent 1
        let s = BigInt::from(s);
        if sign == Sign::Minus {
            -s
        } else {
            s
        }
    }

    /// Exact square root if self is a perfect square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Rat::zero());
        }
        let ns = self.numer().magnitude().sqrt();
        let ds = self.denom().magnitude().sqrt();
        if &ns * &ns == *self.numer().magnitude() && &ds * &ds == *self.denom().magnitude() {
            Some(Rat::from_parts(BigInt::from(ns), BigInt::from(ds)))
        } else {
            None
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub fn int_val_p(n: &BigInt, p: &BigInt) -> i64 {
    assert!(!n.is_zero());
    let mut v = 0i64;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rat {
    type Err = String;

    /// Parses "a", "-a", "a/b" with optional whitespace.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num = BigInt::from_str(n).map_err(|e| format!("bad numerator {n:?}: {e}"))?;
        let den = BigInt::from_str(d).map_err(|e| format!("bad denominator {d:?}: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rat(BigRational::new(num, den)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        self.0 *= rhs.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let r: Rat = "6/4".parse().unwrap();
        assert_eq!(r, Rat::new(3, 2));
        assert_eq!(r.numer(), &BigInt::from(3));
        assert_eq!(r.denom(), &BigInt::from(2));
        let neg: Rat = "-41/49".parse().unwrap();
        assert!(neg.is_negative());
    }

    #[test]
    fn valuations() {
        assert_eq!(Rat::new(98, 3).val_p(7), Some(2));
        assert_eq!(Rat::new(3, 49).val_p(7), Some(-2));
        assert_eq!(Rat::zero().val_p(7), None);
        let (v, u) = Rat::new(98, 3).p_split(7);
        assert_eq!(v, 2);
        assert_eq!(u, Rat::new(2, 3));
    }

    #[test]
    fn squarefree() {
        assert_eq!(
            Rat::new(-2880, 2401).squarefree_part(),
            BigInt::from(-5)
        );
        assert_eq!(Rat::new(12, 1).squarefree_part(), BigInt::from(3));
    }
}
