//! Randomized invariants: field axioms of the quadratic extension, normal
//! form properties, p-adic arithmetic laws, and the Hecke operator identities
//! on arbitrary truncated series.

use num_bigint::BigInt;
use padic_theta::algebra::matrix::{hermite_form, smith_p_part, IntMat};
use padic_theta::algebra::quadext::QuadExt;
use padic_theta::algebra::rational::Rat;
use padic_theta::hecke::{apply_t_p2, apply_u_p2, apply_v_p2};
use padic_theta::padic::{log_of_unit, unit_power, PadicCtx, PadicExponent};
use padic_theta::qseries::QSeries;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Rat::new(n, d))
}

fn quadext() -> impl Strategy<Value = QuadExt> {
    (rat(), rat()).prop_map(|(a, b)| QuadExt::new(Rat::from_int(5), a, b))
}

proptest! {
    #[test]
    fn quadext_field_axioms(x in quadext(), y in quadext(), z in quadext()) {
        // associativity and commutativity of both operations
        prop_assert_eq!(
            x.mul(&y).unwrap().mul(&z).unwrap(),
            x.mul(&y.mul(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        // distributivity
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        // multiplicative inverses off zero
        if !x.is_zero() {
            prop_assert_eq!(x.mul(&x.inv().unwrap()).unwrap(), QuadExt::one(&x.c));
        }
    }

    #[test]
    fn quadext_norm_multiplicative(x in quadext(), y in quadext()) {
        prop_assert_eq!(x.mul(&y).unwrap().norm(), &x.norm() * &y.norm());
    }

    #[test]
    fn hermite_preserves_row_span(entries in proptest::collection::vec(-9i64..=9, 12)) {
        let m = IntMat::from_rows(vec![
            entries[0..4].to_vec(),
            entries[4..8].to_vec(),
            entries[8..12].to_vec(),
        ]);
        let (h, u) = hermite_form(&m);
        // U M = H with |det U| = 1
        prop_assert_eq!(u.mul(&m), h.clone());
        let du = u.det();
        prop_assert!(du == BigInt::from(1) || du == BigInt::from(-1));
        // every original row lies in the row span of H (checked by solving
        // back through the pivots)
        for r in 0..3 {
            let mut row: Vec<BigInt> = m.row(r).to_vec();
            for hr in 0..h.rows {
                let Some(pc) = (0..h.cols).find(|c| !num_traits::Zero::is_zero(&h[(hr, *c)]))
                else { continue };
                if !num_traits::Zero::is_zero(&row[pc]) {
                    let q = &row[pc] / &h[(hr, pc)];
                    for c in 0..h.cols {
                        let t = &q * &h[(hr, c)];
                        row[c] -= t;
                    }
                }
            }
            prop_assert!(
                row.iter().all(num_traits::Zero::is_zero),
                "row {r} escapes the span"
            );
        }
    }

    #[test]
    fn smith_p_part_unimodular_invariance(
        d0 in 0u32..3, d1 in 0u32..3, d2 in 0u32..3,
        s in proptest::collection::vec(-4i64..=4, 6),
    ) {
        let p = 7i64;
        let d = IntMat::from_rows(vec![
            vec![p.pow(d0), 0, 0],
            vec![0, 3 * p.pow(d1), 0],
            vec![0, 0, 2 * p.pow(d2)],
        ]);
        let u = IntMat::from_rows(vec![
            vec![1, s[0], s[1]],
            vec![0, 1, s[2]],
            vec![0, 0, 1],
        ]);
        let v = IntMat::from_rows(vec![
            vec![1, 0, 0],
            vec![s[3], 1, 0],
            vec![s[4], s[5], 1],
        ]);
        let m = u.mul(&d).mul(&v);
        let mut want = vec![d0 as i64, d1 as i64, d2 as i64];
        want.sort_unstable();
        prop_assert_eq!(smith_p_part(&m, 7).unwrap(), want);
    }

    #[test]
    fn padic_valuation_additivity(
        n1 in 1i64..2000, d1 in 1i64..2000, n2 in 1i64..2000, d2 in 1i64..2000,
    ) {
        let ctx = PadicCtx::new(7, 10).unwrap();
        let a = Rat::new(n1, d1);
        let b = Rat::new(n2, d2);
        let xa = padic_theta::padic::PadicNumber::from_rat(ctx, &a).unwrap();
        let xb = padic_theta::padic::PadicNumber::from_rat(ctx, &b).unwrap();
        prop_assert_eq!(
            xa.mul(&xb).ord().unwrap(),
            xa.ord().unwrap() + xb.ord().unwrap()
        );
    }

    #[test]
    fn iwasawa_log_homomorphism(u in 1u64..100_000, v in 1u64..100_000) {
        let ctx = PadicCtx::new(7, 9).unwrap();
        let u = if u % 7 == 0 { u + 1 } else { u };
        let v = if v % 7 == 0 { v + 1 } else { v };
        let residue = |x: &padic_theta::padic::PadicNumber| -> u64 {
            match x.ord() {
                None => 0,
                Some(k) => {
                    let mut r = x.unit;
                    for _ in 0..k.min(9) {
                        r = ctx.mul(r, 7);
                    }
                    r
                }
            }
        };
        let lu = residue(&log_of_unit(ctx, u % ctx.modulus));
        let lv = residue(&log_of_unit(ctx, v % ctx.modulus));
        let luv = residue(&log_of_unit(ctx, ctx.mul(u % ctx.modulus, v % ctx.modulus)));
        let m = ctx.modulus / 49; // two digits of series slack
        prop_assert_eq!(luv % m, ctx.add(lu, lv) % m);
    }

    #[test]
    fn unit_power_addition_law(u in 2u64..10_000, k1 in 0u64..200, k2 in 0u64..200) {
        let ctx = PadicCtx::new(7, 9).unwrap();
        let u = if u % 7 == 0 { u + 1 } else { u };
        let a = unit_power(ctx, u, PadicExponent::from_integer(k1, ctx));
        let b = unit_power(ctx, u, PadicExponent::from_integer(k2, ctx));
        let c = unit_power(ctx, u, PadicExponent::from_integer(k1 + k2, ctx));
        let m = ctx.modulus / 49;
        prop_assert_eq!(ctx.mul(a, b) % m, c % m);
    }

    #[test]
    fn hecke_t_is_u_plus_v_and_uv_is_p(coeffs in proptest::collection::vec(-50i64..=50, 150)) {
        let p = 7u64;
        let mut f = QSeries::zero_to(0i64, coeffs.len() as u64);
        for (i, c) in coeffs.iter().enumerate() {
            f.set(i as u64 + 1, *c);
        }
        let t = apply_t_p2(&f, p).unwrap();
        let u = apply_u_p2(&f, p).unwrap();
        let v = apply_v_p2(&f, p).unwrap();
        for n in 0..=t.bound() {
            prop_assert_eq!(
                *t.coeff(n).unwrap(),
                u.coeff(n).unwrap() + v.coeff(n).unwrap()
            );
        }
        let uv = apply_u_p2(&v, p).unwrap();
        for n in 0..=uv.bound() {
            prop_assert_eq!(*uv.coeff(n).unwrap(), 7 * f.coeff(n).unwrap());
        }
    }

    #[test]
    fn enumeration_negation_parity(seed in 0u64..1_000_000) {
        // v is enumerated iff -v is; per-norm counts are even
        use padic_theta::algebra::matrix::RatMat;
        use padic_theta::lattice::Enumerator;
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        let mut rnd = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        let b: Vec<i64> = (0..9).map(|_| (rnd() % 5) as i64 - 2).collect();
        let mut a = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    a[i][j] += b[k * 3 + i] * b[k * 3 + j];
                }
            }
            a[i][i] += 1 + (rnd() % 2) as i64;
        }
        let mut g = RatMat::zero(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                g[(i, j)] = Rat::from_int(a[i][j]);
            }
        }
        let e = Enumerator::new(&g).unwrap();
        let mut seen: Vec<([i64; 3], u64)> = Vec::new();
        let c3 = e.x3_range(60);
        e.run_stripes(60, -c3, c3, |x, n| seen.push((*x, n))).unwrap();
        let mut counts = std::collections::BTreeMap::<u64, u64>::new();
        for (x, n) in &seen {
            *counts.entry(*n).or_default() += 1;
            let neg = [-x[0], -x[1], -x[2]];
            prop_assert!(seen.iter().any(|(y, m)| *y == neg && m == n));
        }
        for (_, c) in counts {
            prop_assert_eq!(c % 2, 0);
        }
    }
}
