//! Ranking suspicious lines from failed entailments.
//!
//! A non-valid entailment implicates the origin line of every
//! statement-origin condition in its hypothesis. Precondition-origin facts
//! (`requires` clauses, branch guards, loop assumptions) never implicate:
//! the specification is assumed correct. Lines are ranked by
//! (implication count desc, distance to the failing control point asc,
//! source order), which puts the most recent contributor to the most
//! failures on top.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::VerificationResult;
use crate::hoare::{Origin, Propagation, VerifyState};
use crate::lang::Method;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FaultLocError {
    #[error("mismatched inputs: {0}")]
    MismatchedInputs(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspiciousLine {
    pub line: u32,
    /// Number of failed entailments implicating this line.
    pub implication_count: usize,
    /// Minimum |control point - line| over the implicating entailments.
    pub distance: u32,
    /// Ids of the implicating entailments, ascending.
    pub entailment_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspiciousReport {
    pub method: String,
    pub lines: Vec<SuspiciousLine>,
    /// Flagged statement lines over all statement lines, as a percentage.
    pub coverage: f64,
}

impl SuspiciousReport {
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Convert verdicts into a ranked line report.
pub fn localize(
    m: &Method,
    result: &VerificationResult,
    propagation: &Propagation,
) -> Result<SuspiciousReport, FaultLocError> {
    let prop_ids: Vec<u32> = propagation.entailments.iter().map(|e| e.id).collect();
    let result_ids: Vec<u32> = result.verdicts.keys().copied().collect();
    {
        let mut sorted = prop_ids.clone();
        sorted.sort_unstable();
        if sorted != result_ids {
            return Err(FaultLocError::MismatchedInputs(format!(
                "verdict ids {result_ids:?} do not match propagation ids {prop_ids:?}"
            )));
        }
    }
    let statement_lines = m.statement_lines();
    for e in &propagation.entailments {
        for cond in &e.hypothesis {
            if let Origin::Statement(line) = cond.origin {
                if !statement_lines.contains(&line) {
                    return Err(FaultLocError::MismatchedInputs(format!(
                        "condition attributed to line {line}, which holds no statement of `{}`",
                        m.name
                    )));
                }
            }
        }
    }

    let mut flagged: Vec<SuspiciousLine> = Vec::new();
    for e in &propagation.entailments {
        let verdict = &result.verdicts[&e.id];
        if verdict.is_valid() {
            continue;
        }
        let mut lines_in_this_entailment: Vec<u32> = Vec::new();
        for cond in &e.hypothesis {
            if let Origin::Statement(line) = cond.origin {
                if !lines_in_this_entailment.contains(&line) {
                    lines_in_this_entailment.push(line);
                }
            }
        }
        for line in lines_in_this_entailment {
            let distance = e.control_point.abs_diff(line);
            match flagged.iter_mut().find(|f| f.line == line) {
                Some(entry) => {
                    entry.implication_count += 1;
                    entry.distance = entry.distance.min(distance);
                    entry.entailment_ids.push(e.id);
                }
                None => flagged.push(SuspiciousLine {
                    line,
                    implication_count: 1,
                    distance,
                    entailment_ids: vec![e.id],
                }),
            }
        }
    }
    for f in &mut flagged {
        f.entailment_ids.sort_unstable();
        f.entailment_ids.dedup();
    }
    flagged.sort_by(|a, b| {
        b.implication_count
            .cmp(&a.implication_count)
            .then(a.distance.cmp(&b.distance))
            .then(a.line.cmp(&b.line))
    });

    let coverage = if statement_lines.is_empty() {
        0.0
    } else {
        flagged.len() as f64 / statement_lines.len() as f64 * 100.0
    };
    Ok(SuspiciousReport {
        method: m.name.clone(),
        lines: flagged,
        coverage,
    })
}

/// Mark each hypothesis condition of each entailment according to the
/// verdicts (the `StateCondition.verified` tri-state).
pub fn mark_conditions(propagation: &mut Propagation, result: &VerificationResult) {
    for e in &mut propagation.entailments {
        let state = match result.verdicts.get(&e.id) {
            Some(v) if v.is_valid() => VerifyState::Holds,
            Some(_) => VerifyState::Failed,
            None => VerifyState::Unchecked,
        };
        for cond in &mut e.hypothesis {
            cond.verified = state;
        }
    }
}

/// True iff `true_line` appears among the first `n` report entries.
pub fn topn_hit(report: &SuspiciousReport, true_line: u32, n: usize) -> bool {
    assert!(n >= 1, "top-N needs n >= 1");
    report.lines.iter().take(n).any(|l| l.line == true_line)
}
