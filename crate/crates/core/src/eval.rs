//! Batch evaluation over a mutation dataset.
//!
//! The dataset layout matches what `generate_bugs`/the `mutate` command
//! writes: `Bugs_Code/Mutations/*.dfy` are the clean buggy programs, each
//! with a `Bugs_Code/Hints/` twin whose `//buggy line` marker is the ground
//! truth, and `Correct_Code/<source>.dfy` (when present) supplies the
//! original line for exact-match accounting.
//!
//! Metrics follow the usual fault-localization/repair set: Top-1/Top-3
//! accuracy, repair success rate, repair precision (validated patches on the
//! marked line), exact-match rate, and average attempts per success.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::{cross_check_method, verify_method, Backend, Disagreement, EntailError, MethodVerification, SolverConfig};
use crate::faultloc::{localize, topn_hit, SuspiciousReport};
use crate::lang::{has_marker, parse_program};
use crate::repair::{repair_loop, ModelClient, RepairOptions, RepairOutcome, RepairStatus};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset layout error at {path}: expected {expectation}")]
    Layout { path: PathBuf, expectation: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Entail(#[from] EntailError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Model label used for the `Repair/<model>/` output subtree.
    pub model_name: String,
    /// Where to write per-program records and reports. Defaults to the
    /// dataset directory itself.
    pub out_dir: Option<PathBuf>,
    /// `Correct_Code` directory for exact-match accounting. Defaults to
    /// `<dataset>/Correct_Code` when present.
    pub correct_dir: Option<PathBuf>,
    /// Also run the SMT backend and record brute-vs-SMT disagreements.
    pub cross_check: Option<SolverConfig>,
    pub repair: RepairOptions,
    /// Worker threads for per-program pipelines (1 = fully sequential).
    pub jobs: usize,
}

/// Everything observed for one buggy program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub name: String,
    /// Ground-truth faulty line from the Hints twin.
    pub true_line: Option<u32>,
    /// Set when the entry could not be evaluated (parse error, verifies).
    pub invalid: Option<String>,
    pub report: Option<SuspiciousReport>,
    pub top1: bool,
    pub top3: bool,
    /// True line appears anywhere in the report.
    pub localized: bool,
    pub coverage: f64,
    pub outcome: Option<RepairOutcome>,
    /// Attempt index of the first validated patch.
    pub attempts_to_success: Option<u32>,
    /// Per validated patch: did it land on the marked line?
    pub patches_on_true_line: Vec<bool>,
    /// Per validated patch: does it textually match the original correct
    /// line (when the source program is available)?
    pub exact_matches: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub total: usize,
    pub discarded: usize,
    pub localized: usize,
    pub repaired: usize,
    pub top1_pct: f64,
    pub top3_pct: f64,
    pub success_pct: f64,
    pub precision_pct: f64,
    pub exact_match_pct: f64,
    pub avg_attempts: f64,
    pub coverage_mean_pct: f64,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        round2(num as f64 / den as f64 * 100.0)
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Aggregate metrics from per-program records. This is the only aggregation
/// path, so metrics recomputed from persisted records always equal the
/// reported aggregate.
pub fn metrics_from_records(records: &[ProgramRecord]) -> EvalMetrics {
    let total = records.len();
    let valid: Vec<&ProgramRecord> = records.iter().filter(|r| r.invalid.is_none()).collect();
    let discarded = total - valid.len();
    let localized = valid.iter().filter(|r| r.localized).count();
    let repaired = valid
        .iter()
        .filter(|r| {
            r.outcome
                .as_ref()
                .is_some_and(|o| o.status == RepairStatus::Fixed)
        })
        .count();
    let top1 = valid.iter().filter(|r| r.top1).count();
    let top3 = valid.iter().filter(|r| r.top3).count();
    let patches_total: usize = valid.iter().map(|r| r.patches_on_true_line.len()).sum();
    let patches_on_true: usize = valid
        .iter()
        .flat_map(|r| &r.patches_on_true_line)
        .filter(|&&b| b)
        .count();
    let exact_known: usize = valid.iter().map(|r| r.exact_matches.len()).sum();
    let exact_hits: usize = valid
        .iter()
        .flat_map(|r| &r.exact_matches)
        .filter(|&&b| b)
        .count();
    let attempt_values: Vec<u32> = valid
        .iter()
        .filter_map(|r| r.attempts_to_success)
        .collect();
    let avg_attempts = if attempt_values.is_empty() {
        0.0
    } else {
        round2(attempt_values.iter().sum::<u32>() as f64 / attempt_values.len() as f64)
    };
    let coverage_mean_pct = if valid.is_empty() {
        0.0
    } else {
        round2(valid.iter().map(|r| r.coverage).sum::<f64>() / valid.len() as f64)
    };
    EvalMetrics {
        total,
        discarded,
        localized,
        repaired,
        top1_pct: pct(top1, valid.len()),
        top3_pct: pct(top3, valid.len()),
        success_pct: pct(repaired, valid.len()),
        precision_pct: pct(patches_on_true, patches_total),
        exact_match_pct: pct(exact_hits, exact_known),
        avg_attempts,
        coverage_mean_pct,
    }
}

fn first_marker_line(source: &str) -> Option<u32> {
    source
        .lines()
        .position(|l| has_marker(l))
        .map(|i| i as u32 + 1)
}

/// Source stem for a mutant named `<stem>__<label>.dfy`.
fn source_stem(name: &str) -> Option<&str> {
    name.split("__").next().filter(|s| !s.is_empty())
}

fn evaluate_one(
    name: &str,
    mutation_text: &str,
    hints_text: &str,
    backend: &Backend,
    model: &dyn ModelClient,
    opts: &EvalOptions,
    correct_dir: Option<&Path>,
    disagreements: &mut Vec<(String, Vec<Disagreement>)>,
) -> Result<ProgramRecord, EvalError> {
    let mut record = ProgramRecord {
        name: name.to_string(),
        true_line: first_marker_line(hints_text),
        invalid: None,
        report: None,
        top1: false,
        top3: false,
        localized: false,
        coverage: 0.0,
        outcome: None,
        attempts_to_success: None,
        patches_on_true_line: Vec::new(),
        exact_matches: Vec::new(),
    };
    if record.true_line.is_none() {
        record.invalid = Some("hints twin has no //buggy line marker".into());
        return Ok(record);
    }
    let program = match parse_program(mutation_text) {
        Ok(p) => p,
        Err(e) => {
            record.invalid = Some(format!("parse error: {e}"));
            return Ok(record);
        }
    };

    // Verify; the corpus contract is that every entry fails.
    let mut failing: Option<(usize, MethodVerification)> = None;
    for (idx, m) in program.methods.iter().enumerate() {
        let v: MethodVerification = match &opts.cross_check {
            Some(solver) => {
                let (v, d) = cross_check_method(m, solver, brute_bound(backend))?;
                if !d.is_empty() {
                    disagreements.push((format!("{name}::{}", m.name), d));
                }
                v
            }
            None => verify_method(m, backend)?,
        };
        if !v.result.verified && failing.is_none() {
            failing = Some((idx, v));
        }
    }
    let Some((idx, verification)) = failing else {
        record.invalid = Some("program verifies; not a usable corpus entry".into());
        return Ok(record);
    };

    let method = &program.methods[idx];
    let report = localize(method, &verification.result, &verification.propagation)
        .map_err(|e| EvalError::Layout {
            path: PathBuf::from(name),
            expectation: format!("internally consistent localization inputs ({e})"),
        })?;
    let true_line = record.true_line.unwrap();
    record.top1 = topn_hit(&report, true_line, 1);
    record.top3 = topn_hit(&report, true_line, 3);
    record.localized = report.lines.iter().any(|l| l.line == true_line);
    record.coverage = report.coverage;

    let outcome = repair_loop(&program, &report, model, backend, &opts.repair)
        .map_err(|e| EvalError::Layout {
            path: PathBuf::from(name),
            expectation: format!("repairable entry ({e})"),
        })?;
    record.attempts_to_success = outcome.attempts_to_first_fix();
    for patch in &outcome.validated_patches {
        record.patches_on_true_line.push(patch.line == true_line);
        if let Some(dir) = correct_dir {
            if let Some(stem) = source_stem(name) {
                let source_path = dir.join(format!("{stem}.dfy"));
                if let Ok(source) = std::fs::read_to_string(&source_path) {
                    if let Some(original) = source.lines().nth(patch.line as usize - 1) {
                        record
                            .exact_matches
                            .push(original.trim() == patch.text.trim());
                    }
                }
            }
        }
    }
    record.report = Some(report);
    record.outcome = Some(outcome);
    Ok(record)
}

fn brute_bound(backend: &Backend) -> i64 {
    match backend {
        Backend::Brute { bound } => *bound,
        Backend::Smt(_) => 5,
    }
}

/// Run localization and repair over every program in the dataset.
///
/// Writes one JSON record per program into `<out>/Repair/<model>/` and
/// returns the aggregate metrics with all records. An empty dataset yields
/// zeroed metrics and a warning on stderr.
pub fn run_benchmark(
    dataset_dir: &Path,
    backend: &Backend,
    model: &dyn ModelClient,
    opts: &EvalOptions,
) -> Result<(EvalMetrics, Vec<ProgramRecord>, Vec<(String, Vec<Disagreement>)>), EvalError> {
    let mutations_dir = dataset_dir.join("Bugs_Code").join("Mutations");
    let hints_dir = dataset_dir.join("Bugs_Code").join("Hints");
    for (dir, what) in [(&mutations_dir, "Bugs_Code/Mutations"), (&hints_dir, "Bugs_Code/Hints")] {
        if !dir.is_dir() {
            return Err(EvalError::Layout {
                path: dir.clone(),
                expectation: format!("directory {what} to exist"),
            });
        }
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&mutations_dir)
        .map_err(io_err(&mutations_dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "dfy"))
        .collect();
    entries.sort();

    // Twins and inputs are read up front so layout errors surface before any
    // solver or model traffic.
    let mut inputs: Vec<(String, String, String)> = Vec::new();
    for path in &entries {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let twin = hints_dir.join(path.file_name().unwrap());
        if !twin.is_file() {
            return Err(EvalError::Layout {
                path: twin,
                expectation: "a Hints twin for every mutation".into(),
            });
        }
        let mutation_text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let hints_text = std::fs::read_to_string(&twin).map_err(io_err(&twin))?;
        inputs.push((name, mutation_text, hints_text));
    }

    if inputs.is_empty() {
        eprintln!(
            "warning: dataset {} has no mutation entries; all metrics are 0",
            dataset_dir.display()
        );
    }

    let correct_dir = opts
        .correct_dir
        .clone()
        .or_else(|| {
            let d = dataset_dir.join("Correct_Code");
            d.is_dir().then_some(d)
        });

    let jobs = opts.jobs.max(1);
    let mut records: Vec<ProgramRecord> = Vec::with_capacity(inputs.len());
    let mut disagreements: Vec<(String, Vec<Disagreement>)> = Vec::new();
    if jobs == 1 {
        for (name, mutation_text, hints_text) in &inputs {
            records.push(evaluate_one(
                name,
                mutation_text,
                hints_text,
                backend,
                model,
                opts,
                correct_dir.as_deref(),
                &mut disagreements,
            )?);
        }
    } else {
        // Bounded worker pool; results keep input order.
        let results: Vec<(usize, Result<(ProgramRecord, Vec<(String, Vec<Disagreement>)>), EvalError>)> =
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (chunk_idx, chunk) in inputs.chunks(inputs.len().div_ceil(jobs).max(1)).enumerate() {
                    let correct_dir = correct_dir.clone();
                    handles.push(scope.spawn(move || {
                        let mut out = Vec::new();
                        for (i, (name, mutation_text, hints_text)) in chunk.iter().enumerate() {
                            let mut local_disagreements = Vec::new();
                            let res = evaluate_one(
                                name,
                                mutation_text,
                                hints_text,
                                backend,
                                model,
                                opts,
                                correct_dir.as_deref(),
                                &mut local_disagreements,
                            )
                            .map(|r| (r, local_disagreements));
                            out.push((chunk_idx * 1_000_000 + i, res));
                        }
                        out
                    }));
                }
                let mut all = Vec::new();
                for h in handles {
                    all.extend(h.join().expect("worker panicked"));
                }
                all
            });
        let mut sorted = results;
        sorted.sort_by_key(|(k, _)| *k);
        for (_, res) in sorted {
            let (record, local) = res?;
            disagreements.extend(local);
            records.push(record);
        }
    }

    // Persist per-program records.
    let out_root = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| dataset_dir.to_path_buf());
    let model_dir = out_root.join("Repair").join(if opts.model_name.is_empty() {
        model.name()
    } else {
        &opts.model_name
    });
    std::fs::create_dir_all(&model_dir).map_err(io_err(&model_dir))?;
    for record in &records {
        let path = model_dir.join(format!("{}.json", record.name));
        let json = serde_json::to_string_pretty(record).expect("record serializes");
        std::fs::write(&path, json).map_err(io_err(&path))?;
    }

    Ok((metrics_from_records(&records), records, disagreements))
}

/// Side-by-side model comparison: fixed-width text and CSV, sorted by
/// success rate descending, ties broken by fewer average attempts.
pub struct ComparisonTable {
    pub text: String,
    pub csv: String,
}

pub fn compare_models(entries: &[(String, EvalMetrics)]) -> ComparisonTable {
    let mut rows: Vec<&(String, EvalMetrics)> = entries.iter().collect();
    rows.sort_by(|(_, a), (_, b)| {
        b.success_pct
            .partial_cmp(&a.success_pct)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.avg_attempts
                    .partial_cmp(&b.avg_attempts)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let name_width = rows
        .iter()
        .map(|(n, _)| n.len())
        .chain(["Model".len()].into_iter())
        .max()
        .unwrap_or(5);
    let mut text = format!(
        "{:<name_width$}  {:>12}  {:>12}\n",
        "Model", "Success Rate", "Avg Attempts"
    );
    let mut csv = String::from("model,success_rate,avg_attempts\n");
    for (name, m) in rows {
        text.push_str(&format!(
            "{:<name_width$}  {:>11.2}%  {:>12.2}\n",
            name, m.success_pct, m.avg_attempts
        ));
        csv.push_str(&format!("{name},{:.2},{:.2}\n", m.success_pct, m.avg_attempts));
    }
    ComparisonTable { text, csv }
}

/// Render metrics as CSV (one header row, one value row).
pub fn metrics_csv(m: &EvalMetrics) -> String {
    let mut out = String::from(
        "total,discarded,localized,repaired,top1_pct,top3_pct,success_pct,precision_pct,exact_match_pct,avg_attempts,coverage_mean_pct\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}\n",
        m.total,
        m.discarded,
        m.localized,
        m.repaired,
        m.top1_pct,
        m.top3_pct,
        m.success_pct,
        m.precision_pct,
        m.exact_match_pct,
        m.avg_attempts,
        m.coverage_mean_pct
    ));
    out
}

/// Map of per-strategy metrics, keyed by the label segment of mutant names
/// (`<stem>__<strategy>_l<line>`), e.g. restricted views like the
/// operator-flip subset.
pub fn filter_records_by_strategy<'a>(
    records: &'a [ProgramRecord],
    strategy_tag: &str,
) -> Vec<&'a ProgramRecord> {
    let needle = format!("__{strategy_tag}_l");
    records
        .iter()
        .filter(|r| r.name.contains(&needle))
        .collect()
}
