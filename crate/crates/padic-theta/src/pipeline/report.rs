//! Machine-readable run report with a stable key schema. Field order is
//! fixed by struct declaration and maps are sorted, so identical runs emit
//! byte-identical JSON.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub p: u64,
    pub hensel_seed: u64,
    pub precision: u32,
    pub bound: u64,
    pub threads: usize,
    /// ord_p(varpi) = 2t.
    pub t: Option<u32>,
    pub varpi_valuation: Option<i64>,
    pub stages: BTreeMap<String, StageStatus>,
    pub invariants: Vec<InvariantResult>,
    pub tables: BTreeMap<String, String>,
    pub shimura: Option<ShimuraReport>,
    pub jside: Option<JsideReport>,
    pub eord_flag: Option<EordFlag>,
    pub operator_log: Vec<crate::hecke::OpLogEntry>,
}

impl RunReport {
    pub fn new(p: u64, seed: u64, precision: u32, bound: u64, threads: usize) -> Self {
        RunReport {
            p,
            hensel_seed: seed,
            precision,
            bound,
            threads,
            t: None,
            varpi_valuation: None,
            stages: BTreeMap::new(),
            invariants: Vec::new(),
            tables: BTreeMap::new(),
            shimura: None,
            jside: None,
            eord_flag: None,
            operator_log: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.invariants.push(InvariantResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
            && self.stages.values().all(|s| s.ok)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageStatus {
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShimuraReport {
    /// Fitted unit scalar c (mod p) with lift ≡ c * reference, per
    /// discriminant; None when no nonzero coefficient was available.
    pub fitted_scalars: BTreeMap<String, Option<u64>>,
    /// Computable lift indices per discriminant at this bound.
    pub computed_indices: BTreeMap<String, Vec<u64>>,
    pub lift_values: BTreeMap<String, Vec<u64>>,
    /// The projector-normalization note: scaling pr1 by 2 scales every fitted
    /// scalar by 2; only proportionality is asserted.
    pub normalization_note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsideReport {
    /// Per D: rows (n, stage value residue, consecutive-sum residue).
    pub tables: BTreeMap<String, Vec<JsideRow>>,
    pub exponent_sums_vanish: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct JsideRow {
    pub n: u64,
    /// log of the stage-n truncated product, as residue mod p^k.
    pub stage_log: u64,
    /// a_{D p^{2n}} + a_{D p^{2(n+1)}} of the weight-derivative series.
    pub consecutive_sum: u64,
    pub modulus: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EordFlag {
    /// The ordinary-projection row equals the U^2 row; this flag records
    /// whether the (U ± U^2)/2 eigen-structure was verified at this bound.
    pub eigen_structure_verified: bool,
    pub verified_window: u64,
}
