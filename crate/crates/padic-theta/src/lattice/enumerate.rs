//! Exact enumeration of all vectors of bounded norm in a positive-definite
//! rank-3 lattice: rational Cholesky (Lagrange) decomposition with integer box
//! bounds. No floating point anywhere; leaf norms are maintained incrementally
//! in denominator-cleared integers.

use crate::algebra::matrix::RatMat;
use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Q(x) = sum_i q_i (x_i + sum_{j>i} m_ij x_j)^2 with exact rational data.
#[derive(Clone, Debug)]
pub struct CholeskyData {
    pub q: [Rat; 3],
    /// `m[0]` = m_12, `m[1]` = m_13, `m[2]` = m_23
    pub m: [Rat; 3],
}

/// Rational Cholesky of a positive definite Q-gram (A_ii = Q(b_i),
/// A_ij = <b_i,b_j>/2). Errors if the form is not positive definite.
pub fn cholesky(gram_q: &RatMat) -> Result<CholeskyData> {
    let mut a = gram_q.clone();
    assert_eq!((a.rows, a.cols), (3, 3));
    for k in 0..3 {
        if !a[(k, k)].is_positive() {
            return Err(Error::NonPositiveNorm(format!(
                "gram is not positive definite at pivot {k}"
            )));
        }
        for i in k + 1..3 {
            let f = &a[(k, i)] * &a[(k, k)].inv();
            for j in i..3 {
                let t = &f * &a[(k, j)];
                a[(i, j)] = &a[(i, j)] - &t;
            }
        }
    }
    let q = [a[(0, 0)].clone(), a[(1, 1)].clone(), a[(2, 2)].clone()];
    let m = [
        &gram_q[(0, 1)] * &gram_q[(0, 0)].inv(),
        &gram_q[(0, 2)] * &gram_q[(0, 0)].inv(),
        {
            // m_23 comes from the once-reduced block.
            let a11 = &gram_q[(1, 1)]
                - &(&gram_q[(0, 1)] * &(&gram_q[(0, 1)] * &gram_q[(0, 0)].inv()));
            let a12 = &gram_q[(1, 2)]
                - &(&gram_q[(0, 1)] * &(&gram_q[(0, 2)] * &gram_q[(0, 0)].inv()));
            &a12 * &a11.inv()
        },
    ];
    Ok(CholeskyData { q, m })
}

/// floor(sqrt(n/d)) for n >= 0, d > 0, exact.
fn isqrt_floor(n: &BigInt, d: &BigInt) -> i64 {
    if n.is_negative() || n.is_zero() {
        return 0;
    }
    let q = n / d;
    let r = q.sqrt();
    // adjust for the flooring of the division
    let mut s = r.to_i64().expect("enumeration radius fits i64");
    while BigInt::from(s + 1) * BigInt::from(s + 1) * d <= *n {
        s += 1;
    }
    while s > 0 && BigInt::from(s) * BigInt::from(s) * d > *n {
        s -= 1;
    }
    s
}

/// Integer-scaled enumeration engine for one lattice. Streams every x in Z^3
/// with 0 < Q(x) <= bound to the visitor, in ascending lexicographic order of
/// (x3, x2, x1). The visitor receives basis coordinates and the integer norm.
pub struct Enumerator {
    chol: CholeskyData,
    /// common denominator D: all of D*q_i, D*q_i*m_ij, ... cleared as needed
    /// (norms are accumulated as D * Q(x)).
    scale: BigInt,
}

impl Enumerator {
    pub fn new(gram_q: &RatMat) -> Result<Self> {
        let chol = cholesky(gram_q)?;
        // Common denominator for exact integer accumulation of D*Q(x).
        let mut scale = BigInt::from(1);
        for qi in &chol.q {
            scale = num_integer::lcm(scale, qi.denom().clone());
        }
        for mi in &chol.m {
            // q_i m_ij^2 and cross terms need den(m)^2 cleared against q.
            let d2 = mi.denom() * mi.denom();
            scale = num_integer::lcm(scale, d2);
        }
        // q2 * m23^2 mixes q2's and m23's denominators.
        let extra = chol.q[1].denom() * (chol.m[2].denom() * chol.m[2].denom());
        scale = num_integer::lcm(scale, extra);
        let extra = chol.q[0].denom() * (chol.m[0].denom() * chol.m[0].denom());
        scale = num_integer::lcm(scale, extra);
        let extra = chol.q[0].denom() * (chol.m[1].denom() * chol.m[1].denom());
        scale = num_integer::lcm(scale, extra);
        Ok(Enumerator { chol, scale })
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// Visit all x with 0 < Q(x) <= bound. `visit(coords, norm)` gets the
    /// integer norm Q(x) (an error is returned if some Q(x) is not an
    /// integer). Only x3-stripes in [x3_lo, x3_hi] are visited, which is the
    /// partitioning hook: the full range is [-c3, c3].
    pub fn run_stripes<F: FnMut(&[i64; 3], u64)>(
        &self,
        bound: u64,
        x3_lo: i64,
        x3_hi: i64,
        mut visit: F,
    ) -> Result<()> {
        let ch = &self.chol;
        let d = &self.scale;
        // Integer-scaled constants.
        let sq = |r: &Rat| -> BigInt { r.numer() * (d / r.denom()) }; // D * r for r with denom | D
        let dq3 = sq(&ch.q[2]);
        let bound_scaled = BigInt::from(bound) * d;

        // Level 3: q3 x3^2 <= bound.
        let c3 = isqrt_floor(&bound_scaled, &dq3);
        let lo3 = x3_lo.max(-c3);
        let hi3 = x3_hi.min(c3);
        let mut x3 = lo3;
        while x3 <= hi3 {
            let x3b = BigInt::from(x3);
            let t2 = &bound_scaled - &dq3 * &x3b * &x3b; // D*(bound - q3 x3^2) >= 0
            // Level 2: q2 (x2 + m23 x3)^2 <= t2/D.
            // Work with u2 = x2 + m23 x3 as an exact rational offset.
            let c23 = &ch.m[2] * &Rat::from_bigint(x3b.clone());
            // x2 range: -c23 - sqrt(t2/(D q2)) <= x2 <= -c23 + sqrt(...)
            let dq2 = sq(&ch.q[1]);
            let rad2 = isqrt_floor(&t2, &dq2); // floor of sqrt((bound - ...)/q2)
            let (lo2, hi2) = center_range(&c23, rad2);
            let mut x2 = lo2;
            while x2 <= hi2 {
                let u2 = &Rat::from_int(x2) + &c23;
                // s2 = D * q2 * u2^2, exact integer (denominators divide D)
                let s2num = {
                    let t = &(&ch.q[1] * &u2) * &u2;
                    debug_assert!((d % t.denom()).is_zero());
                    t.numer() * (d / t.denom())
                };
                let t1 = &t2 - &s2num;
                if t1.is_negative() {
                    x2 += 1;
                    continue;
                }
                // Level 1: q1 (x1 + m12 x2 + m13 x3)^2 <= t1/D.
                let c1 = &(&ch.m[0] * &Rat::from_int(x2))
                    + &(&ch.m[1] * &Rat::from_bigint(x3b.clone()));
                let dq1 = sq(&ch.q[0]);
                let rad1 = isqrt_floor(&t1, &dq1);
                let (lo1, hi1) = center_range(&c1, rad1);
                // Incremental exact scaled norm along x1:
                // N(x1) = base + D q1 (x1 + c1)^2 where base = D*bound - t1.
                // Row constants are exact integers; the sweep runs in i128
                // (validated at conversion; magnitudes are bounded by
                // D*bound plus one row step).
                let base = &bound_scaled - &t1;
                let u1_lo = &Rat::from_int(lo1) + &c1;
                let n_lo = {
                    let t = &(&ch.q[0] * &u1_lo) * &u1_lo;
                    debug_assert!((d % t.denom()).is_zero());
                    &base + &(t.numer() * (d / t.denom()))
                };
                // delta(x1) = N(x1+1) - N(x1) = D q1 (2(x1 + c1) + 1)
                let delta0 = {
                    let t = &(&ch.q[0] * &u1_lo) * &Rat::from_int(2);
                    let t = &t + &ch.q[0];
                    debug_assert!((d % t.denom()).is_zero());
                    t.numer() * (d / t.denom())
                };
                let to_i128 = |b: &BigInt, what: &str| -> Result<i128> {
                    b.to_i128().ok_or_else(|| {
                        Error::Overflow(format!("{what} exceeds i128 in enumeration"))
                    })
                };
                let mut n_cur = to_i128(&n_lo, "row norm")?;
                let mut delta = to_i128(&delta0, "row step")?;
                let dq1_2 = to_i128(&(&dq1 + &dq1), "step increment")?;
                let bnd = to_i128(&bound_scaled, "scaled bound")?;
                let dscale = to_i128(d, "denominator scale")?;
                // Guard against overflow across the whole row sweep.
                let steps = (hi1 - lo1).max(0) as i128;
                let max_delta = delta.abs() + dq1_2.abs() * (steps + 1);
                if bnd.checked_add(max_delta.checked_mul(steps + 2).ok_or_else(
                    || Error::Overflow("row sweep magnitude".into()),
                )?)
                .is_none()
                {
                    return Err(Error::Overflow("row sweep magnitude".into()));
                }
                let mut x1 = lo1;
                while x1 <= hi1 {
                    if n_cur > 0 && n_cur <= bnd {
                        if n_cur % dscale != 0 {
                            return Err(Error::InvariantViolated(format!(
                                "non-integral norm {}/{} at coords ({x1},{x2},{x3})",
                                n_cur, dscale
                            )));
                        }
                        visit(&[x1, x2, x3], (n_cur / dscale) as u64);
                    }
                    n_cur += delta;
                    delta += dq1_2;
                    x1 += 1;
                }
                x2 += 1;
            }
            x3 += 1;
        }
        Ok(())
    }

    /// Full range of the outermost coordinate for a given bound.
    pub fn x3_range(&self, bound: u64) -> i64 {
        let d = &self.scale;
        let dq3 = self.chol.q[2].numer() * (d / self.chol.q[2].denom());
        let bound_scaled = BigInt::from(bound) * d;
        isqrt_floor(&bound_scaled, &dq3)
    }
}

/// Integer x range guaranteed to contain {x : |x + center| <= r} for any real
/// r with floor(r) = rad. Widened by one on each side; out-of-range candidates
/// are discarded by the exact per-leaf norm check.
fn center_range(center: &Rat, rad: i64) -> (i64, i64) {
    let neg = -center.clone();
    let fl = num_integer::Integer::div_floor(neg.numer(), neg.denom())
        .to_i64()
        .expect("enumeration center fits i64");
    (fl - rad - 1, fl + rad + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_diag(a: i64, b: i64, c: i64) -> RatMat {
        let mut g = RatMat::zero(3, 3);
        g[(0, 0)] = Rat::from_int(a);
        g[(1, 1)] = Rat::from_int(b);
        g[(2, 2)] = Rat::from_int(c);
        g
    }

    #[test]
    fn diagonal_form_counts() {
        // Q = 2x^2 + 13y^2 + 26z^2: Q = 2 has exactly ±(1,0,0); Q = 1 none.
        let g = gram_diag(2, 13, 26);
        let e = Enumerator::new(&g).unwrap();
        let mut found = Vec::new();
        e.run_stripes(2, i64::MIN / 2, i64::MAX / 2, |c, n| {
            found.push((*c, n));
        })
        .unwrap();
        assert_eq!(found.len(), 2);
        assert!(found.iter().all(|(_, n)| *n == 2));
        let mut count1 = 0;
        e.run_stripes(1, i64::MIN / 2, i64::MAX / 2, |_, _| count1 += 1)
            .unwrap();
        assert_eq!(count1, 0);
    }

    #[test]
    fn brute_force_oracle_random_grams() {
        // Independent oracle: box scan bounded by X * (A^{-1})_ii (valid since
        // x_i^2 <= Q(x) * (A^{-1})_ii for positive definite A).
        let mut seed: u64 = 0x9e3779b97f4a7c15;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for trial in 0..50 {
            // A = B^T B + diag(1..3): positive definite, integer entries.
            let b: Vec<i64> = (0..9).map(|_| (rnd() % 7) as i64 - 3).collect();
            let mut a = [[0i64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        a[i][j] += b[k * 3 + i] * b[k * 3 + j];
                    }
                }
                a[i][i] += 1 + (rnd() % 3) as i64;
            }
            let mut g = RatMat::zero(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    g[(i, j)] = Rat::from_int(a[i][j]);
                }
            }
            let x = 200u64;
            let e = Enumerator::new(&g).unwrap();
            let mut counts = vec![0u64; (x + 1) as usize];
            e.run_stripes(x, i64::MIN / 2, i64::MAX / 2, |_, n| {
                counts[n as usize] += 1;
            })
            .unwrap();

            // Oracle.
            let inv = g.inverse().unwrap();
            let bound = |i: usize| -> i64 {
                let r = &inv[(i, i)] * &Rat::from_int(x as i64);
                isqrt_floor(r.numer(), r.denom()) + 1
            };
            let (b0, b1, b2) = (bound(0), bound(1), bound(2));
            let mut oracle = vec![0u64; (x + 1) as usize];
            for x0 in -b0..=b0 {
                for x1 in -b1..=b1 {
                    for x2 in -b2..=b2 {
                        if (x0, x1, x2) == (0, 0, 0) {
                            continue;
                        }
                        let v = [x0, x1, x2];
                        let mut q = 0i64;
                        for i in 0..3 {
                            for j in 0..3 {
                                q += a[i][j] * v[i] * v[j];
                            }
                        }
                        if q > 0 && (q as u64) <= x {
                            oracle[q as usize] += 1;
                        }
                    }
                }
            }
            assert_eq!(counts, oracle, "trial {trial} gram {a:?}");
        }
    }

    #[test]
    fn partitioned_run_is_identical() {
        let g = gram_diag(2, 13, 26);
        let e = Enumerator::new(&g).unwrap();
        let x = 500u64;
        let mut full = vec![0u64; (x + 1) as usize];
        e.run_stripes(x, i64::MIN / 2, i64::MAX / 2, |_, n| full[n as usize] += 1)
            .unwrap();
        let c3 = e.x3_range(x);
        let mut merged = vec![0u64; (x + 1) as usize];
        let mut lo = -c3;
        while lo <= c3 {
            let hi = (lo + 2).min(c3);
            e.run_stripes(x, lo, hi, |_, n| merged[n as usize] += 1)
                .unwrap();
            lo = hi + 1;
        }
        assert_eq!(full, merged);
    }
}
