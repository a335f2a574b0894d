//! JSON document shapes emitted by the CLI. The corresponding JSON Schemas
//! live in `docs/schemas/`.

use serde::Serialize;

use veripatch_core::entail::MethodVerification;
use veripatch_core::faultloc::SuspiciousReport;
use veripatch_core::hoare::EntailmentKind;
use veripatch_core::lang::Method;
use veripatch_core::repair::RepairOutcome;

#[derive(Serialize)]
pub struct EntailmentReport {
    pub id: u32,
    pub kind: String,
    pub control_point: u32,
    pub conclusion: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<std::collections::BTreeMap<String, i64>>,
    pub elapsed_ms: u64,
}

#[derive(Serialize)]
pub struct MethodReport {
    pub name: String,
    pub verified: bool,
    pub warnings: Vec<String>,
    /// Ordered by numeric entailment id.
    pub entailments: Vec<EntailmentReport>,
}

impl MethodReport {
    pub fn build(method: &Method, verification: MethodVerification) -> Self {
        let mut entailments = Vec::new();
        for e in &verification.propagation.entailments {
            let verdict = &verification.result.verdicts[&e.id];
            entailments.push(EntailmentReport {
                id: e.id,
                kind: match e.kind {
                    EntailmentKind::Postcondition => "postcondition".into(),
                    EntailmentKind::LoopInit => "loop-init".into(),
                    EntailmentKind::LoopMaintain => "loop-maintain".into(),
                },
                control_point: e.control_point,
                conclusion: e.conclusion.to_string(),
                status: format!("{:?}", verdict.status),
                counterexample: verdict.counterexample.clone(),
                elapsed_ms: verdict.elapsed_ms,
            });
        }
        entailments.sort_by_key(|e| e.id);
        MethodReport {
            name: method.name.clone(),
            verified: verification.result.verified,
            warnings: verification.propagation.warnings.clone(),
            entailments,
        }
    }
}

#[derive(Serialize)]
pub struct DisagreementReport {
    pub method: String,
    pub entailment_id: u32,
    pub brute: String,
    pub smt: String,
}

#[derive(Serialize)]
pub struct VerifyOutput {
    pub file: String,
    pub verified: bool,
    pub methods: Vec<MethodReport>,
    pub disagreements: Vec<DisagreementReport>,
}

#[derive(Serialize)]
pub struct LocalizeOutput {
    pub file: String,
    pub reports: Vec<SuspiciousReport>,
}

#[derive(Serialize)]
pub struct MutateSummary {
    pub sources: usize,
    pub verified: usize,
    pub kept: usize,
    pub discarded: usize,
    pub no_sites: usize,
    pub skipped_unverified: Vec<String>,
    pub skipped_unparseable: Vec<String>,
}

#[derive(Serialize)]
pub struct RepairOutput {
    pub file: String,
    pub method: String,
    pub already_verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RepairOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patched_file: Option<String>,
}

#[derive(Serialize)]
pub struct DisagreementFile {
    pub program: String,
    pub disagreements: Vec<DisagreementReport>,
}
