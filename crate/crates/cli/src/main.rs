//! `veripatch` — verify, localize, mutate, repair, and evaluate
//! contract-annotated programs.
//!
//! Exit codes are a stable scripting contract:
//! 0 success / verified, 1 domain-negative (unverified, unfixable),
//! 2 input error (parse, type, unsupported construct, dataset layout),
//! 3 external-service error (solver or model endpoint).

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use veripatch_core::entail::{cross_check_method, verify_method, Backend, SolverConfig};
use veripatch_core::eval::{compare_models, metrics_csv, run_benchmark, EvalOptions};
use veripatch_core::faultloc::localize;
use veripatch_core::lang::{format_program, parse_program, replace_line, Program};
use veripatch_core::mutate::{find_sites, generate_bugs, Strategy};
use veripatch_core::repair::{
    repair_loop, write_transcript, HttpModelClient, MockModel, ModelClient, ModelError,
    RepairOptions, RepairStatus,
};

use output::*;

#[derive(Parser)]
#[command(
    name = "veripatch",
    version,
    about = "Specification-guided fault localization and repair for contract-annotated programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum BackendChoice {
    Brute,
    Smt,
    Both,
}

#[derive(Args, Clone)]
struct BackendArgs {
    /// Entailment backend: bounded brute force, SMT solver, or both
    /// (cross-check mode, reporting any disagreement).
    #[arg(long, value_enum, default_value = "brute")]
    backend: BackendChoice,
    /// Brute-force enumeration bound (integers in [-bound, bound]).
    #[arg(long, default_value = "5")]
    bound: i64,
    /// SMT solver executable (default: $VERIPATCH_SOLVER, then z3/cvc5 on PATH).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Wall-clock limit per solver query, in milliseconds.
    #[arg(long, default_value = "20000")]
    solver_timeout_ms: u64,
    /// Write each SMT query to this directory as check_<id>.smt2.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model name; `mock` selects the offline deterministic model.
    #[arg(long, default_value = "mock")]
    model_name: String,
    /// Base URL of an OpenAI-compatible endpoint (.../chat/completions is appended).
    #[arg(long, default_value = "https://api.openai.com/v1")]
    model_url: String,
    /// Completion token cap.
    #[arg(long, default_value = "30")]
    max_tokens: u32,
    /// Sampling temperature.
    #[arg(long, default_value = "0.2")]
    temperature: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check every method of a file against its specification.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Rank suspicious lines for every failing method of a file.
    Localize {
        file: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Build a mutation dataset from a directory of verified programs.
    Mutate {
        src_dir: PathBuf,
        out_dir: PathBuf,
        /// Comma-separated strategies: op,coef,reorder,combined.
        #[arg(long, default_value = "op,coef,reorder,combined", value_delimiter = ',')]
        strategies: Vec<String>,
        /// RNG seed; the dataset is bit-reproducible for a fixed seed.
        #[arg(long, default_value = "7")]
        seed: u64,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Localize and repair a single buggy file.
    Repair {
        file: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Directory for the transcript and patched file (default: next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Batch-evaluate localization and repair over a mutation dataset.
    Eval {
        dataset_dir: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Worker threads for per-program pipelines.
        #[arg(long, default_value = "1")]
        jobs: usize,
        /// Output root for metrics and per-program records (default: the dataset).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Anything that should stop the run, mapped to an exit code.
enum CliError {
    Input(String),
    External(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::External(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::External(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn external_err(e: impl std::fmt::Display) -> CliError {
    CliError::External(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { file, backend } => cmd_verify(&file, &backend),
        Command::Localize { file, backend } => cmd_localize(&file, &backend),
        Command::Mutate {
            src_dir,
            out_dir,
            strategies,
            seed,
            backend,
        } => cmd_mutate(&src_dir, &out_dir, &strategies, seed, &backend),
        Command::Repair {
            file,
            backend,
            model,
            out,
        } => cmd_repair(&file, &backend, &model, out.as_deref()),
        Command::Eval {
            dataset_dir,
            backend,
            model,
            jobs,
            out,
        } => cmd_eval(&dataset_dir, &backend, &model, jobs, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn solver_config(args: &BackendArgs) -> Result<SolverConfig, CliError> {
    let mut cfg = match &args.solver {
        Some(path) => SolverConfig::new(path.clone()),
        None => SolverConfig::locate().ok_or_else(|| {
            external_err("no SMT solver found: pass --solver, set VERIPATCH_SOLVER, or install z3")
        })?,
    };
    cfg.timeout_ms = args.solver_timeout_ms;
    cfg.dump_dir = args.dump_smt.clone();
    Ok(cfg)
}

/// The single-backend view (`both` verifies with brute force and
/// cross-checks against the solver separately).
fn primary_backend(args: &BackendArgs) -> Result<Backend, CliError> {
    match args.backend {
        BackendChoice::Brute | BackendChoice::Both => Ok(Backend::Brute { bound: args.bound }),
        BackendChoice::Smt => Ok(Backend::Smt(solver_config(args)?)),
    }
}

fn read_program(file: &Path) -> Result<(String, Program), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| input_err(format!("cannot read {}: {e}", file.display())))?;
    let program = parse_program(&text).map_err(input_err)?;
    Ok((text, program))
}

/// Verify every method, honoring cross-check mode.
fn verify_all(
    program: &Program,
    args: &BackendArgs,
) -> Result<(Vec<MethodReport>, Vec<DisagreementReport>), CliError> {
    let backend = primary_backend(args)?;
    let solver = if args.backend == BackendChoice::Both {
        Some(solver_config(args)?)
    } else {
        None
    };
    let mut methods = Vec::new();
    let mut disagreements = Vec::new();
    for m in &program.methods {
        let verification = match &solver {
            Some(cfg) => {
                let (v, d) = cross_check_method(m, cfg, args.bound).map_err(external_err)?;
                disagreements.extend(d.into_iter().map(|dis| DisagreementReport {
                    method: m.name.clone(),
                    entailment_id: dis.entailment_id,
                    brute: format!("{:?}", dis.brute),
                    smt: format!("{:?}", dis.smt),
                }));
                v
            }
            None => verify_method(m, &backend).map_err(external_err)?,
        };
        methods.push(MethodReport::build(m, verification));
    }
    Ok((methods, disagreements))
}

fn cmd_verify(file: &Path, args: &BackendArgs) -> Result<u8, CliError> {
    let (_, program) = read_program(file)?;
    let (methods, disagreements) = verify_all(&program, args)?;
    let verified = methods.iter().all(|m| m.verified);
    let doc = VerifyOutput {
        file: file.display().to_string(),
        verified,
        methods,
        disagreements,
    };
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(if verified { 0 } else { 1 })
}

fn cmd_localize(file: &Path, args: &BackendArgs) -> Result<u8, CliError> {
    let (_, program) = read_program(file)?;
    let backend = primary_backend(args)?;
    let mut reports = Vec::new();
    for m in &program.methods {
        let v = verify_method(m, &backend).map_err(external_err)?;
        let report = localize(m, &v.result, &v.propagation).map_err(input_err)?;
        reports.push(report);
    }
    let doc = LocalizeOutput {
        file: file.display().to_string(),
        reports,
    };
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(0)
}

fn parse_strategies(tags: &[String]) -> Result<Vec<Strategy>, CliError> {
    tags.iter()
        .map(|t| {
            Strategy::parse_tag(t.trim())
                .ok_or_else(|| input_err(format!("unknown strategy `{t}`")))
        })
        .collect()
}

fn write_out(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| input_err(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, content)
        .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))
}

fn cmd_mutate(
    src_dir: &Path,
    out_dir: &Path,
    strategy_tags: &[String],
    seed: u64,
    args: &BackendArgs,
) -> Result<u8, CliError> {
    if !src_dir.is_dir() {
        return Err(input_err(format!("{} is not a directory", src_dir.display())));
    }
    let strategies = parse_strategies(strategy_tags)?;
    let backend = primary_backend(args)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(src_dir)
        .map_err(|e| input_err(format!("cannot read {}: {e}", src_dir.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "dfy"))
        .collect();
    files.sort();

    let correct_dir = out_dir.join("Correct_Code");
    let hints_dir = out_dir.join("Bugs_Code").join("Hints");
    let mutations_dir = out_dir.join("Bugs_Code").join("Mutations");
    let all_dir = out_dir.join("All_Bugs_Code");
    let fail_dir = out_dir.join("Fail_Bugs_Code");
    for d in [&correct_dir, &hints_dir, &mutations_dir, &all_dir, &fail_dir] {
        std::fs::create_dir_all(d)
            .map_err(|e| input_err(format!("cannot create {}: {e}", d.display())))?;
    }

    let mut summary = MutateSummary {
        sources: files.len(),
        verified: 0,
        kept: 0,
        discarded: 0,
        no_sites: 0,
        skipped_unverified: Vec::new(),
        skipped_unparseable: Vec::new(),
    };
    for path in &files {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(path)
            .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
        let program = match parse_program(&text) {
            Ok(p) => p,
            Err(e) => {
                summary.skipped_unparseable.push(format!("{stem}: {e}"));
                continue;
            }
        };
        let (kept, discarded) = match generate_bugs(&program, &strategies, seed, &backend) {
            Ok(result) => result,
            Err(veripatch_core::mutate::MutateError::SourceNotVerified(_)) => {
                summary.skipped_unverified.push(stem.clone());
                continue;
            }
            Err(veripatch_core::mutate::MutateError::Entail(e)) => return Err(external_err(e)),
            Err(e) => return Err(input_err(e)),
        };
        summary.verified += 1;
        summary.discarded += discarded;
        write_out(
            &correct_dir.join(format!("{stem}.dfy")),
            &format_program(&program),
        )?;
        if kept.is_empty() {
            // No mutable arithmetic, or nothing survived verification.
            write_out(
                &fail_dir.join(format!("{stem}.dfy")),
                &format_program(&program),
            )?;
            if find_sites(&program).is_empty() {
                summary.no_sites += 1;
            }
            continue;
        }
        for m in &kept {
            let name = format!("{stem}__{}.dfy", m.label);
            write_out(&hints_dir.join(&name), &format_program(&m.marked))?;
            write_out(&mutations_dir.join(&name), &format_program(&m.unmarked))?;
            write_out(&all_dir.join(&name), &format_program(&m.unmarked))?;
        }
        summary.kept += kept.len();
    }
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    Ok(0)
}

fn build_model(model: &ModelArgs) -> Result<Box<dyn ModelClient>, CliError> {
    if model.model_name == "mock" {
        return Ok(Box::new(MockModel::new()));
    }
    match HttpModelClient::from_env(&model.model_url, &model.model_name) {
        Ok(client) => Ok(Box::new(client)),
        Err(err @ ModelError::MissingApiKey(..)) => Err(external_err(err)),
        Err(err) => Err(external_err(err)),
    }
}

fn repair_options(model: &ModelArgs) -> RepairOptions {
    RepairOptions {
        max_tokens: model.max_tokens,
        temperature: model.temperature,
        ..RepairOptions::default()
    }
}

fn cmd_repair(
    file: &Path,
    args: &BackendArgs,
    model_args: &ModelArgs,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let (_, program) = read_program(file)?;
    let model = build_model(model_args)?;
    let backend = primary_backend(args)?;

    // Find the failing method; nothing to do if the file verifies.
    let mut target = None;
    for m in &program.methods {
        let v = verify_method(m, &backend).map_err(external_err)?;
        if !v.result.verified {
            target = Some((m, v));
            break;
        }
    }
    let Some((method, verification)) = target else {
        eprintln!("{}: already verifies; nothing to repair", file.display());
        let doc = RepairOutput {
            file: file.display().to_string(),
            method: String::new(),
            already_verified: true,
            outcome: None,
            patched_file: None,
        };
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        return Ok(0);
    };

    let report =
        localize(method, &verification.result, &verification.propagation).map_err(input_err)?;
    let outcome = repair_loop(
        &program,
        &report,
        model.as_ref(),
        &backend,
        &repair_options(model_args),
    )
    .map_err(external_err)?;

    let stem = file.file_stem().unwrap_or_default().to_string_lossy();
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| file.parent().map(Path::to_path_buf))
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| input_err(format!("cannot create {}: {e}", out_dir.display())))?;
    let transcript = out_dir.join(format!("{stem}.transcript.jsonl"));
    write_transcript(&outcome, &transcript)
        .map_err(|e| input_err(format!("cannot write transcript: {e}")))?;

    let mut patched_file = None;
    if let Some(patch) = outcome.validated_patches.first() {
        let patched = replace_line(&program, patch.line, &patch.text).map_err(input_err)?;
        let path = out_dir.join(format!("{stem}.fixed.dfy"));
        write_out(&path, &format_program(&patched))?;
        eprintln!("fixed line {}: {}", patch.line, patch.text);
        patched_file = Some(path.display().to_string());
    }

    let aborted = outcome.aborted.clone();
    let status = outcome.status;
    let doc = RepairOutput {
        file: file.display().to_string(),
        method: method.name.clone(),
        already_verified: false,
        outcome: Some(outcome),
        patched_file,
    };
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    if let Some(detail) = aborted {
        return Err(external_err(format!("model unavailable: {detail}")));
    }
    Ok(if status == RepairStatus::Fixed { 0 } else { 1 })
}

fn cmd_eval(
    dataset_dir: &Path,
    args: &BackendArgs,
    model_args: &ModelArgs,
    jobs: usize,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let model = build_model(model_args)?;
    let backend = primary_backend(args)?;
    let cross_check = if args.backend == BackendChoice::Both {
        Some(solver_config(args)?)
    } else {
        None
    };
    let out_root = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dataset_dir.to_path_buf());
    let opts = EvalOptions {
        model_name: model_args.model_name.clone(),
        out_dir: Some(out_root.clone()),
        correct_dir: None,
        cross_check,
        repair: repair_options(model_args),
        jobs,
    };
    let (metrics, _records, disagreements) = run_benchmark(dataset_dir, &backend, model.as_ref(), &opts)
        .map_err(|e| match e {
            veripatch_core::eval::EvalError::Entail(inner) => external_err(inner),
            other => input_err(other),
        })?;

    write_out(
        &out_root.join("metrics.json"),
        &serde_json::to_string_pretty(&metrics).unwrap(),
    )?;
    write_out(&out_root.join("metrics.csv"), &metrics_csv(&metrics))?;
    if args.backend == BackendChoice::Both {
        let doc: Vec<DisagreementFile> = disagreements
            .iter()
            .map(|(program, items)| DisagreementFile {
                program: program.clone(),
                disagreements: items
                    .iter()
                    .map(|d| DisagreementReport {
                        method: String::new(),
                        entailment_id: d.entailment_id,
                        brute: format!("{:?}", d.brute),
                        smt: format!("{:?}", d.smt),
                    })
                    .collect(),
            })
            .collect();
        write_out(
            &out_root.join("backend_disagreements.json"),
            &serde_json::to_string_pretty(&doc).unwrap(),
        )?;
    }
    let table = compare_models(&[(model_args.model_name.clone(), metrics)]);
    print!("{}", table.text);
    Ok(0)
}
