//! The p-adic family of weighted theta series: the weight-0 member vanishes
//! identically, classical integer weights match the weight-space members
//! after embedding, and the derivative at 0 is the log-weighted series.
//!
//! Run with: cargo run --release --example theta_family

use padic_theta::padic::PadicExponent;
use padic_theta::sample;
use padic_theta::schwartz::SchwartzWeight;
use padic_theta::theta::{theta, ThetaRunConfig, ThetaSeries, WeightSpec};

fn main() -> padic_theta::Result<()> {
    let ee = sample::embedded_eigen(12)?;
    let phi = SchwartzWeight::from_lattices(vec![
        (1, sample::maximal_order_trace_zero()),
        (-1, sample::conjugated_order_trace_zero()),
    ]);
    let mut cfg = ThetaRunConfig::new(100);
    cfg.support_prime = Some(sample::SUPPORT_PRIME);

    // Weight 0: identically zero by the telescoping of the ± conditions.
    let at0 = theta(&phi, &ee, WeightSpec::IntegerPower(0), &cfg)?;
    match &at0.series {
        ThetaSeries::Int(s) => println!("weight 0 member vanishes: {}", s.is_zero()),
        _ => unreachable!(),
    }

    // Weight 6 (= p - 1): a genuine half-integral-weight theta series with
    // field coefficients; its weight-space counterpart agrees p-adically.
    let classical = theta(&phi, &ee, WeightSpec::IntegerPower(6), &cfg)?;
    if let ThetaSeries::Quad(s) = &classical.series {
        let nz = s.support();
        println!(
            "weight 6 member: first supported indices {:?}",
            &nz[..nz.len().min(6)]
        );
    }
    let k = PadicExponent::from_integer(6, ee.emb.ctx);
    let family = theta(&phi, &ee, WeightSpec::PadicPower(k), &cfg)?;
    if let ThetaSeries::Mod(s) = &family.series {
        println!(
            "weight-space member at k = 6 mod 7^{}: a_2 = {}",
            s.a0.ctx.n,
            s.coeff(2).unwrap().value
        );
    }

    // The derivative at 0: log-weighted sums, divisible by p.
    let deriv = theta(&phi, &ee, WeightSpec::LogDerivative, &cfg)?;
    if let ThetaSeries::Mod(s) = &deriv.series {
        let row: Vec<u64> = [2u64, 5, 6, 7, 8]
            .iter()
            .map(|d| s.coeff(*d).unwrap().div_p().unwrap().value % 7)
            .collect();
        println!("derivative over p, mod 7, at D = 2,5,6,7,8: {row:?}");
    }
    Ok(())
}
