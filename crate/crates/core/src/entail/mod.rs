//! Discharging entailments.
//!
//! Two interchangeable backends: an external SMT-LIB v2 solver subprocess
//! ([`smt`]) and a bounded brute-force integer evaluator ([`brute`]). The
//! brute-force route is a desk-scale oracle: it enables solver-free runs and
//! cross-validates the solver (`cross_check_method`).

pub mod brute;
pub mod smt;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hoare::{self, Entailment, HoareError, Propagation};
use crate::lang::Method;

pub use brute::{check_bruteforce, confirm_counterexample, MAX_BOUND, MAX_SYMBOLS};
pub use smt::{check_smt, to_smt, SolverConfig};

#[derive(Debug, Clone, Error)]
pub enum EntailError {
    #[error("solver executable not found: {0}")]
    SolverNotFound(String),
    #[error("solver protocol error: no sat/unsat/unknown in output: {0:?}")]
    SolverProtocol(String),
    #[error("entailment has {count} free symbols; brute force handles at most {max}")]
    TooManySymbols { count: usize, max: usize },
    #[error("brute-force bound {bound} outside 1..={max}")]
    BoundTooLarge { bound: i64, max: i64 },
    #[error(transparent)]
    Hoare(#[from] HoareError),
    #[error("i/o error talking to solver: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Valid,
    Invalid,
    Unknown,
    Timeout,
}

/// Outcome of one entailment check. A counterexample, when present, makes
/// the hypothesis true and the conclusion false (boolean symbols are encoded
/// as 0/1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub counterexample: Option<BTreeMap<String, i64>>,
    pub elapsed_ms: u64,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }
}

/// Per-entailment verdicts for one method, keyed by numeric id. The map is
/// ordered numerically, so iteration (and serialization) can never fall into
/// lexicographic `check_10 < check_2` territory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub verdicts: BTreeMap<u32, Verdict>,
    pub verified: bool,
}

impl VerificationResult {
    fn from_verdicts(verdicts: BTreeMap<u32, Verdict>) -> Self {
        let verified = verdicts.values().all(Verdict::is_valid);
        VerificationResult { verdicts, verified }
    }

    pub fn failing_ids(&self) -> Vec<u32> {
        self.verdicts
            .iter()
            .filter(|(_, v)| !v.is_valid())
            .map(|(id, _)| *id)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    Brute { bound: i64 },
    Smt(SolverConfig),
}

impl Backend {
    pub fn check(&self, e: &Entailment) -> Result<Verdict, EntailError> {
        match self {
            Backend::Brute { bound } => check_bruteforce(e, *bound),
            Backend::Smt(cfg) => check_smt(e, cfg),
        }
    }
}

/// Propagation plus verdicts for one method.
#[derive(Debug, Clone)]
pub struct MethodVerification {
    pub propagation: Propagation,
    pub result: VerificationResult,
}

/// Run propagation and discharge every entailment with the chosen backend.
pub fn verify_method(m: &Method, backend: &Backend) -> Result<MethodVerification, EntailError> {
    let propagation = hoare::propagate(m)?;
    let mut verdicts = BTreeMap::new();
    for e in &propagation.entailments {
        verdicts.insert(e.id, backend.check(e)?);
    }
    Ok(MethodVerification {
        propagation,
        result: VerificationResult::from_verdicts(verdicts),
    })
}

/// True iff every method of the program verifies.
pub fn verify_program(
    p: &crate::lang::Program,
    backend: &Backend,
) -> Result<bool, EntailError> {
    for m in &p.methods {
        if !verify_method(m, backend)?.result.verified {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A brute-vs-SMT conflict that violates the one-directional agreement rule:
/// brute-force `Invalid` (a concrete in-box counterexample) while the solver
/// claims `Valid`. The other direction (solver finds a counterexample outside
/// the brute-force box) is expected and not a disagreement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disagreement {
    pub entailment_id: u32,
    pub brute: Status,
    pub smt: Status,
}

/// Cross-check mode: discharge with both backends, report brute verdicts as
/// primary, and collect agreement violations.
pub fn cross_check_method(
    m: &Method,
    solver: &SolverConfig,
    bound: i64,
) -> Result<(MethodVerification, Vec<Disagreement>), EntailError> {
    let propagation = hoare::propagate(m)?;
    let mut verdicts = BTreeMap::new();
    let mut disagreements = Vec::new();
    for e in &propagation.entailments {
        let brute = check_bruteforce(e, bound)?;
        let smt = check_smt(e, solver)?;
        if brute.status == Status::Invalid && smt.status == Status::Valid {
            disagreements.push(Disagreement {
                entailment_id: e.id,
                brute: brute.status,
                smt: smt.status,
            });
        }
        verdicts.insert(e.id, brute);
    }
    Ok((
        MethodVerification {
            propagation,
            result: VerificationResult::from_verdicts(verdicts),
        },
        disagreements,
    ))
}
