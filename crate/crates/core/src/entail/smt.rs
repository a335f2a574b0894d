//! SMT-LIB v2 emission and the external solver subprocess driver.
//!
//! An entailment `H1 && ... && Hn ==> C` is discharged as a validity query:
//! assert every hypothesis, assert the negated conclusion, `(check-sat)`.
//! `unsat` means the entailment is valid; `sat` refutes it and the model is
//! parsed into a counterexample. The protocol is plain SMT-LIB text on
//! stdin/stdout, so any conforming solver (z3, cvc5) works.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::hoare::Entailment;
use crate::lang::{BinOp, Expr, Type, UnOp};

use super::{EntailError, Status, Verdict};

/// Default per-query wall-clock limit (20 s).
pub const DEFAULT_TIMEOUT_MS: u64 = 20_000;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout_ms: u64,
    /// When set, each query is also written to `check_<id>.smt2` in this
    /// directory, with the id zero-padded to 4 digits so that numeric and
    /// lexicographic order coincide.
    pub dump_dir: Option<PathBuf>,
}

impl SolverConfig {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path: PathBuf = path.into();
        // z3 only reads stdin when asked to.
        let args = if path
            .file_stem()
            .and_then(|s| s.to_str())
            .is_some_and(|s| s.starts_with("z3"))
        {
            vec!["-in".to_string()]
        } else {
            Vec::new()
        };
        SolverConfig {
            path,
            args,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            dump_dir: None,
        }
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Self {
        self.timeout_ms = timeout_ms;
        self
    }

    /// Find a solver: `$VERIPATCH_SOLVER`, then `z3`/`cvc5` on `$PATH`.
    pub fn locate() -> Option<SolverConfig> {
        if let Ok(path) = std::env::var("VERIPATCH_SOLVER") {
            if !path.is_empty() {
                return Some(SolverConfig::new(path));
            }
        }
        for name in ["z3", "cvc5"] {
            if let Some(found) = find_on_path(name) {
                return Some(SolverConfig::new(found));
            }
        }
        None
    }
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    let path_var = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path_var) {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

fn smt_type(ty: Type) -> &'static str {
    match ty {
        Type::Int => "Int",
        Type::Bool => "Bool",
    }
}

fn expr_to_smt(e: &Expr, out: &mut String) {
    match e {
        Expr::IntLit(v, _) => {
            if *v < 0 {
                // Not produced by the parser, but kept total.
                let _ = write!(out, "(- {})", v.unsigned_abs());
            } else {
                let _ = write!(out, "{v}");
            }
        }
        Expr::BoolLit(b, _) => {
            let _ = write!(out, "{b}");
        }
        Expr::Var(name, _) => {
            let _ = write!(out, "{name}");
        }
        Expr::Unary(op, inner, _) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "not",
            };
            let _ = write!(out, "({sym} ");
            expr_to_smt(inner, out);
            out.push(')');
        }
        Expr::Binary(BinOp::Neq, lhs, rhs, _) => {
            out.push_str("(not (= ");
            expr_to_smt(lhs, out);
            out.push(' ');
            expr_to_smt(rhs, out);
            out.push_str("))");
        }
        Expr::Binary(op, lhs, rhs, _) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "div",
                BinOp::Mod => "mod",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::Eq => "=",
                BinOp::And => "and",
                BinOp::Or => "or",
                BinOp::Implies => "=>",
                BinOp::Neq => unreachable!(),
            };
            let _ = write!(out, "({sym} ");
            expr_to_smt(lhs, out);
            out.push(' ');
            expr_to_smt(rhs, out);
            out.push(')');
        }
    }
}

/// Render the validity query for an entailment. Deterministic: symbols are
/// declared in first-use order, formulas in hypothesis order.
pub fn to_smt(e: &Entailment) -> String {
    let mut out = String::new();
    out.push_str("(set-logic ALL)\n");
    for (name, ty) in &e.symbols {
        let _ = writeln!(out, "(declare-const {name} {})", smt_type(*ty));
    }
    for cond in &e.hypothesis {
        out.push_str("(assert ");
        expr_to_smt(&cond.formula, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(assert (not ");
    expr_to_smt(&e.conclusion, &mut out);
    out.push_str("))\n(check-sat)\n(get-model)\n");
    out
}

/// Run one query against the configured solver.
pub fn check_smt(e: &Entailment, cfg: &SolverConfig) -> Result<Verdict, EntailError> {
    let script = to_smt(e);
    if let Some(dir) = &cfg.dump_dir {
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("check_{:04}.smt2", e.id)), &script);
    }
    let start = Instant::now();
    let mut child = Command::new(&cfg.path)
        .args(&cfg.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|err| {
            if err.kind() == std::io::ErrorKind::NotFound {
                EntailError::SolverNotFound(cfg.path.display().to_string())
            } else {
                EntailError::Io(err.to_string())
            }
        })?;

    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // The solver may exit before consuming everything; a broken pipe
        // here is not an error, the output tells the story.
        let _ = stdin.write_all(script.as_bytes());
    }

    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });

    let timeout = Duration::from_millis(cfg.timeout_ms);
    let timed_out = loop {
        match child.try_wait().map_err(|e| EntailError::Io(e.to_string()))? {
            Some(_) => break false,
            None => {
                if start.elapsed() >= timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    break true;
                }
                std::thread::sleep(Duration::from_millis(2));
            }
        }
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let output = reader.join().unwrap_or_default();

    if timed_out {
        return Ok(Verdict {
            status: Status::Timeout,
            counterexample: None,
            elapsed_ms,
        });
    }

    let status = output
        .lines()
        .map(str::trim)
        .find_map(|line| match line {
            "sat" => Some(Status::Invalid),
            "unsat" => Some(Status::Valid),
            "unknown" => Some(Status::Unknown),
            _ => None,
        })
        .ok_or(EntailError::SolverProtocol(output.clone()))?;

    let counterexample = if status == Status::Invalid {
        parse_model(&output, e)
    } else {
        None
    };

    Ok(Verdict {
        status,
        counterexample,
        elapsed_ms,
    })
}

/// Pull `(define-fun NAME () TYPE VALUE)` entries out of a model. Values are
/// integer literals, `(- N)`, or boolean literals (encoded 0/1).
fn parse_model(output: &str, e: &Entailment) -> Option<BTreeMap<String, i64>> {
    let tokens = sexpr_tokens(output);
    let mut cex = BTreeMap::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "define-fun" && i + 1 < tokens.len() {
            let name = tokens[i + 1].clone();
            // skip: name ( ) TYPE
            let mut j = i + 2;
            if tokens.get(j).map(String::as_str) == Some("(") {
                while j < tokens.len() && tokens[j] != ")" {
                    j += 1;
                }
                j += 1; // past ')'
            }
            j += 1; // past the type
            let value = match tokens.get(j).map(String::as_str) {
                Some("(") => {
                    // (- N)
                    if tokens.get(j + 1).map(String::as_str) == Some("-") {
                        tokens
                            .get(j + 2)
                            .and_then(|t| t.parse::<i64>().ok())
                            .map(|v| -v)
                    } else {
                        None
                    }
                }
                Some("true") => Some(1),
                Some("false") => Some(0),
                Some(tok) => tok.parse::<i64>().ok(),
                None => None,
            };
            if let Some(v) = value {
                if e.symbols.iter().any(|(n, _)| *n == name) {
                    cex.insert(name, v);
                }
            }
            i = j;
        }
        i += 1;
    }
    if cex.is_empty() {
        None
    } else {
        // Unmentioned symbols default to 0 (solvers omit don't-care values).
        let mut full = BTreeMap::new();
        for (name, _) in &e.symbols {
            full.insert(name.clone(), cex.get(name).copied().unwrap_or(0));
        }
        Some(full)
    }
}

fn sexpr_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}
