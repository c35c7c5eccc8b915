//! TOML run configuration: algebra constants, order bases, the conjugating
//! element, gamma, the Hensel seed, precision, bounds and stage data.
//! Quaternion elements are written as four rationals "t,x,y,z"; lattices as
//! basis-element lists. Parse errors cite the offending line and field.

use crate::algebra::rational::Rat;
use crate::error::{Error, Result};
use crate::quaternion::{Order, Quat, QuaternionAlgebra, QuatQ, ScalarRing};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub algebra: AlgebraSection,
    pub prime: PrimeSection,
    pub orders: BTreeMap<String, OrderSection>,
    pub elements: ElementsSection,
    pub weight: WeightSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    /// i^2 (a rational, as a string), e.g. "-2"
    pub a: String,
    /// j^2, e.g. "-13"
    pub b: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeSection {
    pub p: u64,
    /// Residue mod p seeding the Hensel lift (pins the prime above p).
    pub hensel_seed: u64,
    /// Working p-adic precision (digits).
    #[serde(default = "default_precision")]
    pub precision: u32,
}

fn default_precision() -> u32 {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSection {
    /// "Z[1/p]" or "Z"
    pub ring: String,
    /// Four elements "t,x,y,z" with rational entries.
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsSection {
    pub alpha: String,
    pub gamma: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub terms: Vec<WeightTermSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTermSection {
    pub coeff: i64,
    pub order: String,
    #[serde(default)]
    pub conjugate_by_alpha: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Coefficient bound X for q-expansions.
    pub bound: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Prime q with the support condition (-D/q) != 1 on nonzero
    /// coefficients; checked when present.
    pub support_prime: Option<u64>,
    /// D columns for the four-piece table.
    pub table1_d: Vec<u64>,
    /// D columns for the operator table.
    pub table2_d: Vec<u64>,
    /// Discriminants for the Shimura lift stage.
    #[serde(default)]
    pub lift_discs: Vec<i64>,
    /// Level (the product of the ramified primes and the Eichler level) used
    /// by the lift's coprimality condition.
    pub level: u64,
    /// Reference eigenform coefficients mod p (index n = 1, 2, ...) against
    /// which lift proportionality is fitted.
    #[serde(default)]
    pub f_reference: Vec<u64>,
    /// D values for the truncated-product stage.
    #[serde(default)]
    pub jside_d: Vec<u64>,
    #[serde(default = "default_jside_n")]
    pub jside_n_max: u64,
}

fn default_threads() -> usize {
    1
}

fn default_jside_n() -> u64 {
    1
}

/// Parsed and validated run data.
pub struct PipelineConfig {
    pub alg: Arc<QuaternionAlgebra>,
    pub p: u64,
    pub hensel_seed: u64,
    pub precision: u32,
    pub orders: BTreeMap<String, Order>,
    pub alpha: QuatQ,
    pub gamma: QuatQ,
    pub weight_terms: Vec<(i64, String, bool)>,
    pub run: RunSection,
}

fn parse_rat(s: &str, what: &str) -> Result<Rat> {
    s.parse()
        .map_err(|e| Error::Config(format!("{what}: {e}")))
}

fn parse_quat(alg: &Arc<QuaternionAlgebra>, s: &str, what: &str) -> Result<QuatQ> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "{what}: expected four comma-separated rationals \"t,x,y,z\", got {s:?}"
        )));
    }
    let c: Vec<Rat> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| parse_rat(p, &format!("{what} component {i}")))
        .collect::<Result<_>>()?;
    Ok(Quat::new(
        alg,
        c[0].clone(),
        c[1].clone(),
        c[2].clone(),
        c[3].clone(),
    ))
}

pub fn load(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<PipelineConfig> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
    if file.prime.p < 3 || file.prime.p % 2 == 0 {
        return Err(Error::Config(format!(
            "prime.p = {} must be an odd prime",
            file.prime.p
        )));
    }
    if !is_prime(file.prime.p) {
        return Err(Error::Config(format!(
            "prime.p = {} is not prime",
            file.prime.p
        )));
    }
    let a = parse_rat(&file.algebra.a, "algebra.a")?;
    let b = parse_rat(&file.algebra.b, "algebra.b")?;
    let alg = Arc::new(QuaternionAlgebra::new(a, b));
    let mut orders = BTreeMap::new();
    for (name, sec) in &file.orders {
        let ring = match sec.ring.as_str() {
            "Z" => ScalarRing::Int,
            "Z[1/p]" => ScalarRing::IntInvP(file.prime.p),
            other => {
                return Err(Error::Config(format!(
                    "orders.{name}.ring: unknown ring {other:?} (use \"Z\" or \"Z[1/p]\")"
                )))
            }
        };
        if sec.basis.len() != 4 {
            return Err(Error::Config(format!(
                "orders.{name}.basis: expected 4 elements, got {}",
                sec.basis.len()
            )));
        }
        let basis: Vec<QuatQ> = sec
            .basis
            .iter()
            .enumerate()
            .map(|(i, s)| parse_quat(&alg, s, &format!("orders.{name}.basis[{i}]")))
            .collect::<Result<_>>()?;
        let order = Order::new(alg.clone(), basis.try_into().unwrap(), ring)
            .map_err(|e| Error::Config(format!("orders.{name}: {e}")))?;
        orders.insert(name.clone(), order);
    }
    let alpha = parse_quat(&alg, &file.elements.alpha, "elements.alpha")?;
    let gamma = parse_quat(&alg, &file.elements.gamma, "elements.gamma")?;
    let mut weight_terms = Vec::new();
    for (i, t) in file.weight.terms.iter().enumerate() {
        if !orders.contains_key(&t.order) {
            return Err(Error::Config(format!(
                "weight.terms[{i}].order: unknown order {:?}",
                t.order
            )));
        }
        weight_terms.push((t.coeff, t.order.clone(), t.conjugate_by_alpha));
    }
    if weight_terms.is_empty() {
        return Err(Error::Config("weight.terms must be nonempty".into()));
    }
    Ok(PipelineConfig {
        alg,
        p: file.prime.p,
        hensel_seed: file.prime.hensel_seed,
        precision: file.prime.precision,
        orders,
        alpha,
        gamma,
        weight_terms,
        run: file.run,
    })
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
