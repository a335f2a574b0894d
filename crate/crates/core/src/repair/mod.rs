//! Candidate-fix generation and validation.
//!
//! For each suspicious line, in rank order: build the prompt, query the
//! model, sanitize the response, splice the candidate into the program, and
//! re-verify. A verified candidate joins the validated-patch list and
//! iteration moves to the next suspicious line; a line is abandoned after
//! three attempts. Every line is tried against the original program (the
//! single-bug assumption), and each patch in the outcome verifies on its
//! own.

pub mod model;
pub mod prompt;
pub mod sanitize;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::{verify_program, Backend, EntailError};
use crate::faultloc::SuspiciousReport;
use crate::lang::{replace_line, LangError, Program};

pub use model::{
    line_candidates, mock_model, HttpModelClient, MockModel, ModelClient, ModelError,
    ScriptedModel, API_KEY_VARS,
};
pub use prompt::{
    build_prompt, build_prompt_with, Prompt, DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE,
    PROMPT_SUFFIX, SYSTEM_PROMPT,
};
pub use sanitize::{sanitize_response, Rejection};

/// Per-line query budget: "up to three times per line".
pub const MAX_ATTEMPTS_PER_LINE: u32 = 3;

#[derive(Debug, Clone, Error)]
pub enum RepairError {
    #[error("line {0} not found in the program")]
    LineNotFound(u32),
    #[error(transparent)]
    Entail(#[from] EntailError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptVerdict {
    Verified,
    FailedVerification,
    Unparseable,
}

/// One model query and what became of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairAttempt {
    pub line: u32,
    /// 1-based attempt index for this line; never exceeds 3.
    pub attempt: u32,
    pub raw_response: String,
    pub candidate: Option<String>,
    pub rejection: Option<String>,
    pub verdict: AttemptVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairStatus {
    Fixed,
    Unfixable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub attempts: Vec<RepairAttempt>,
    pub validated_patches: Vec<Patch>,
    pub status: RepairStatus,
    /// Transport failure detail when the loop aborted early; the outcome is
    /// incomplete in that case.
    pub aborted: Option<String>,
}

impl RepairOutcome {
    fn finish(attempts: Vec<RepairAttempt>, patches: Vec<Patch>, aborted: Option<String>) -> Self {
        let status = if patches.is_empty() {
            RepairStatus::Unfixable
        } else {
            RepairStatus::Fixed
        };
        RepairOutcome {
            attempts,
            validated_patches: patches,
            status,
            aborted,
        }
    }

    /// Attempt index of the first validated patch, if any.
    pub fn attempts_to_first_fix(&self) -> Option<u32> {
        let first = self.validated_patches.first()?;
        self.attempts
            .iter()
            .find(|a| {
                a.line == first.line
                    && a.verdict == AttemptVerdict::Verified
                    && a.candidate.as_deref() == Some(first.text.as_str())
            })
            .map(|a| a.attempt)
    }
}

#[derive(Debug, Clone)]
pub struct RepairOptions {
    pub max_attempts: u32,
    pub max_tokens: u32,
    pub temperature: f64,
    /// Append failed candidates as "do not repeat" lines on retries.
    pub discourage_repeats: bool,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions {
            max_attempts: MAX_ATTEMPTS_PER_LINE,
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: DEFAULT_TEMPERATURE,
            discourage_repeats: true,
        }
    }
}

/// Iterate suspicious lines in rank order, querying the model up to three
/// times per line and validating every candidate by re-verification.
///
/// `p` must be a program that fails verification (the caller established
/// that when it produced `report`). Transport errors abort cleanly: the
/// partial outcome is returned with `aborted` set.
pub fn repair_loop(
    p: &Program,
    report: &SuspiciousReport,
    model: &dyn ModelClient,
    backend: &Backend,
    opts: &RepairOptions,
) -> Result<RepairOutcome, RepairError> {
    let mut attempts: Vec<RepairAttempt> = Vec::new();
    let mut patches: Vec<Patch> = Vec::new();

    for sline in &report.lines {
        let line = sline.line;
        let mut last_failed: Option<String> = None;
        for attempt in 1..=opts.max_attempts {
            let avoid = if opts.discourage_repeats && attempt > 1 {
                last_failed.as_deref()
            } else {
                None
            };
            let prompt =
                build_prompt_with(p, line, opts.max_tokens, opts.temperature, avoid)?;
            let raw = match model.complete(&prompt) {
                Ok(raw) => raw,
                Err(err) => {
                    return Ok(RepairOutcome::finish(
                        attempts,
                        patches,
                        Some(err.to_string()),
                    ));
                }
            };
            let candidate = match sanitize_response(&raw) {
                Ok(c) => c,
                Err(rej) => {
                    attempts.push(RepairAttempt {
                        line,
                        attempt,
                        raw_response: raw,
                        candidate: None,
                        rejection: Some(rej.to_string()),
                        verdict: AttemptVerdict::Unparseable,
                    });
                    continue;
                }
            };
            let patched = match replace_line(p, line, &candidate) {
                Ok(prog) => prog,
                Err(err) => {
                    // A candidate that does not re-parse consumes its attempt.
                    attempts.push(RepairAttempt {
                        line,
                        attempt,
                        raw_response: raw,
                        candidate: Some(candidate.clone()),
                        rejection: Some(err.to_string()),
                        verdict: AttemptVerdict::Unparseable,
                    });
                    last_failed = Some(candidate);
                    continue;
                }
            };
            if verify_program(&patched, backend)? {
                attempts.push(RepairAttempt {
                    line,
                    attempt,
                    raw_response: raw,
                    candidate: Some(candidate.clone()),
                    rejection: None,
                    verdict: AttemptVerdict::Verified,
                });
                patches.push(Patch {
                    line,
                    text: candidate,
                });
                break; // continue iterating over the remaining lines
            }
            attempts.push(RepairAttempt {
                line,
                attempt,
                raw_response: raw,
                candidate: Some(candidate.clone()),
                rejection: None,
                verdict: AttemptVerdict::FailedVerification,
            });
            last_failed = Some(candidate);
        }
    }
    Ok(RepairOutcome::finish(attempts, patches, None))
}

/// Append the outcome's attempts to a JSON-lines transcript, one
/// [`RepairAttempt`] per line.
pub fn write_transcript(outcome: &RepairOutcome, path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for attempt in &outcome.attempts {
        let line = serde_json::to_string(attempt).expect("attempt serializes");
        writeln!(file, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entail::verify_method;
    use crate::faultloc::localize;
    use crate::lang::parse_program;

    const ABS_BUGGY: &str = "\
method abs(x: int) returns (res: int)
  ensures x >= 0 ==> res == x
  ensures x < 0 ==> res == -x
{
  if (x >= 0) {
    return x;
  } else {
    return x;
  }
}";

    fn brute() -> Backend {
        Backend::Brute { bound: 5 }
    }

    fn report_for(p: &Program) -> SuspiciousReport {
        let v = verify_method(&p.methods[0], &brute()).unwrap();
        assert!(!v.result.verified, "fixture must fail verification");
        localize(&p.methods[0], &v.result, &v.propagation).unwrap()
    }

    #[test]
    fn mock_fixes_abs_on_the_first_attempt() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let outcome = repair_loop(
            &p,
            &report,
            &MockModel::new(),
            &brute(),
            &RepairOptions::default(),
        )
        .unwrap();
        assert_eq!(outcome.status, RepairStatus::Fixed);
        assert_eq!(outcome.validated_patches.len(), 1);
        let patch = &outcome.validated_patches[0];
        assert_eq!(patch.line, 8);
        assert_eq!(patch.text, "return -x;");
        assert_eq!(outcome.attempts_to_first_fix(), Some(1));
        assert!(outcome.aborted.is_none());
    }

    #[test]
    fn echoing_the_buggy_text_is_unfixable_after_three_attempts() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let model = ScriptedModel::new(vec!["return x;"]);
        let outcome =
            repair_loop(&p, &report, &model, &brute(), &RepairOptions::default()).unwrap();
        assert_eq!(outcome.status, RepairStatus::Unfixable);
        assert!(outcome.validated_patches.is_empty());
        assert_eq!(outcome.attempts.len(), 3);
        assert!(outcome
            .attempts
            .iter()
            .all(|a| a.verdict == AttemptVerdict::FailedVerification));
    }

    #[test]
    fn garbage_then_fix_records_both_attempts() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let model = ScriptedModel::new(vec![
            "I think the problem is the sign of x here.",
            "```c\nreturn -x;\n```",
        ]);
        let outcome =
            repair_loop(&p, &report, &model, &brute(), &RepairOptions::default()).unwrap();
        assert_eq!(outcome.status, RepairStatus::Fixed);
        assert_eq!(outcome.attempts.len(), 2);
        assert_eq!(outcome.attempts[0].verdict, AttemptVerdict::Unparseable);
        assert_eq!(outcome.attempts[1].verdict, AttemptVerdict::Verified);
        assert_eq!(outcome.attempts_to_first_fix(), Some(2));
    }

    #[test]
    fn reparse_failures_consume_attempts() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let model = ScriptedModel::new(vec!["return ???;", "return -x;"]);
        let outcome =
            repair_loop(&p, &report, &model, &brute(), &RepairOptions::default()).unwrap();
        assert_eq!(outcome.status, RepairStatus::Fixed);
        assert_eq!(outcome.attempts[0].verdict, AttemptVerdict::Unparseable);
        assert_eq!(outcome.attempts_to_first_fix(), Some(2));
    }

    #[test]
    fn no_line_is_queried_more_than_three_times() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let model = ScriptedModel::new(vec!["return 0;"]);
        let outcome =
            repair_loop(&p, &report, &model, &brute(), &RepairOptions::default()).unwrap();
        let mut per_line = std::collections::BTreeMap::new();
        for a in &outcome.attempts {
            *per_line.entry(a.line).or_insert(0u32) += 1;
            assert!(a.attempt <= MAX_ATTEMPTS_PER_LINE);
        }
        assert!(per_line.values().all(|&n| n <= MAX_ATTEMPTS_PER_LINE));
    }

    #[test]
    fn transport_failure_aborts_cleanly() {
        struct Failing;
        impl ModelClient for Failing {
            fn complete(&self, _prompt: &Prompt) -> Result<String, ModelError> {
                Err(ModelError::Unavailable("connection refused".into()))
            }
            fn name(&self) -> &str {
                "failing"
            }
        }
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let outcome =
            repair_loop(&p, &report, &Failing, &brute(), &RepairOptions::default()).unwrap();
        assert_eq!(outcome.status, RepairStatus::Unfixable);
        assert!(outcome.aborted.as_deref().unwrap().contains("connection refused"));
        assert!(outcome.attempts.is_empty());
    }

    #[test]
    fn validated_patches_verify_in_isolation() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let outcome = repair_loop(
            &p,
            &report,
            &MockModel::new(),
            &brute(),
            &RepairOptions::default(),
        )
        .unwrap();
        for patch in &outcome.validated_patches {
            let patched = replace_line(&p, patch.line, &patch.text).unwrap();
            assert!(verify_program(&patched, &brute()).unwrap());
        }
    }

    #[test]
    fn transcript_is_json_lines() {
        let p = parse_program(ABS_BUGGY).unwrap();
        let report = report_for(&p);
        let outcome = repair_loop(
            &p,
            &report,
            &MockModel::new(),
            &brute(),
            &RepairOptions::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        write_transcript(&outcome, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut n = 0;
        for line in text.lines() {
            let attempt: RepairAttempt = serde_json::from_str(line).unwrap();
            assert!(attempt.attempt >= 1);
            n += 1;
        }
        assert_eq!(n, outcome.attempts.len());
    }
}
