//! Hensel lifting and the p-adic embedding of the quadratic field.
//!
//! Lifts the seed 3 to a root of x^2 + 5 over Z_7, embeds the eigenvalue
//! varpi of the demonstration unit gamma, and shows the Iwasawa logarithm
//! killing p-powers and roots of unity.
//!
//! Run with: cargo run --release --example hensel_embedding

use padic_theta::algebra::quadext::QuadExt;
use padic_theta::algebra::rational::Rat;
use padic_theta::padic::{hensel_root, iwasawa_log, teichmuller, PadicCtx, PadicNumber};
use padic_theta::sample;

fn main() -> padic_theta::Result<()> {
    // Root of x^2 + 5 with x ≡ 3 mod 7, at increasing precision.
    for n in [1u32, 2, 3, 6, 12] {
        let e = hensel_root(&Rat::from_int(5), 7, 3, n)?;
        println!("root mod 7^{n:<2} = {}", e.root);
    }
    let emb = sample::embedding(12)?;
    assert_eq!(emb.root % 49, 17);
    assert_eq!(emb.root % 343, 311);

    // varpi = -12x/49 - 41/49 has norm 1; under this embedding its valuation
    // is +2 (and the conjugate's is -2), so t = 1.
    let c5 = Rat::from_int(5);
    let varpi = QuadExt::new(c5.clone(), Rat::new(-41, 49), Rat::new(-12, 49));
    println!("norm(varpi) = {}", varpi.norm());
    println!("ord_p(varpi)      = {:?}", emb.embed(&varpi)?.ord());
    println!("ord_p(conj varpi) = {:?}", emb.embed(&varpi.conj())?.ord());

    // Iwasawa branch: log(7) = 0, log of Teichmueller lifts = 0.
    let ctx = PadicCtx::new(7, 12)?;
    let seven = PadicNumber::from_rat(ctx, &Rat::from_int(7))?;
    println!("log_p(7) is zero: {}", iwasawa_log(&seven).is_zero());
    let om = teichmuller(ctx, 3);
    println!(
        "teichmuller(3) = {om}, omega^6 = {}, log omega = {}",
        ctx.pow(om, 6),
        iwasawa_log(&PadicNumber::from_unit(ctx, om, 0)).is_zero()
    );
    Ok(())
}
