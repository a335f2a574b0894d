//! Mutation-based bug injection for dataset construction.
//!
//! Four strategies over arithmetic sites in executable code (specification
//! lines — `requires`, `ensures`, `invariant`, `decreases` — are never
//! touched):
//!
//! - operator replacement: swap `+`/`-`, `*`/`/`, `%`/`/` (plus dropping a
//!   unary minus on sites that have no binary operator);
//! - coefficient modification: replace a constant `c` with a value drawn
//!   uniformly from `[-c, +c]`, excluding `c` itself so the program changes;
//! - variable reordering: apply a non-identity permutation to the variable
//!   occurrences of the expression;
//! - combined: operator replacement followed by coefficient modification on
//!   the same line, when both apply.
//!
//! Every surviving mutant re-parses, type-checks, and fails verification;
//! mutants that still verify (for example `a + b` reordered to `b + a` under
//! a symmetric specification) are discarded. Mutations splice the raw line
//! text at exact token positions, so a kept mutant differs from its source
//! on exactly one line.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entail::{verify_program, Backend, EntailError};
use crate::lang::{mark_line, parse_program, Block, Expr, LangError, Program, StmtKind, Type, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    OperatorReplacement,
    CoefficientModification,
    VariableReordering,
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::OperatorReplacement,
        Strategy::CoefficientModification,
        Strategy::VariableReordering,
        Strategy::Combined,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Strategy::OperatorReplacement => "op",
            Strategy::CoefficientModification => "coef",
            Strategy::VariableReordering => "reorder",
            Strategy::Combined => "combined",
        }
    }

    pub fn parse_tag(tag: &str) -> Option<Strategy> {
        match tag {
            "op" | "operator" => Some(Strategy::OperatorReplacement),
            "coef" | "coefficient" => Some(Strategy::CoefficientModification),
            "reorder" => Some(Strategy::VariableReordering),
            "combined" => Some(Strategy::Combined),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum MutateError {
    #[error("site has no binary arithmetic operator")]
    NoOperator,
    #[error("site has no non-zero integer constant")]
    NoConstant,
    #[error("site references fewer than two distinct variables")]
    TooFewVariables,
    #[error("source program `{0}` does not verify; refusing to mutate")]
    SourceNotVerified(String),
    #[error(transparent)]
    Entail(#[from] EntailError),
    #[error(transparent)]
    Lang(#[from] LangError),
}

/// One mutation applied to one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub strategy: Strategy,
    pub line: u32,
    pub original_line: String,
    pub mutated_line: String,
    pub seed: u64,
}

/// A kept mutant: fails verification, differs from the source on one line.
#[derive(Debug, Clone)]
pub struct Mutant {
    /// Distinguishing label, e.g. `op_l8`.
    pub label: String,
    pub record: MutationRecord,
    /// With the `//buggy line` marker on the mutated line.
    pub marked: Program,
    /// Without the marker.
    pub unmarked: Program,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpToken {
    pub col: u32,
    pub op: char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstToken {
    pub col: u32,
    pub len: u32,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarToken {
    pub col: u32,
    pub len: u32,
    pub name: String,
}

/// The mutable arithmetic content of one executable line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    pub line: u32,
    pub text: String,
    /// Binary arithmetic operators, left to right.
    pub ops: Vec<OpToken>,
    /// Unary minus positions, left to right.
    pub negs: Vec<u32>,
    /// Integer literals, left to right.
    pub consts: Vec<ConstToken>,
    /// Integer-typed variable occurrences, left to right.
    pub vars: Vec<VarToken>,
}

impl Site {
    pub fn distinct_var_names(&self) -> usize {
        let names: BTreeSet<&str> = self.vars.iter().map(|v| v.name.as_str()).collect();
        names.len()
    }
}

/// Locate every executable line with arithmetic content: a binary arithmetic
/// operator, a unary minus, an integer literal, or two or more distinct
/// integer variables. Deterministic order (ascending line).
pub fn find_sites(p: &Program) -> Vec<Site> {
    let mut sites = Vec::new();
    for m in &p.methods {
        collect_block_sites(&m.body, m, p, &mut sites);
    }
    sites.sort_by_key(|s| s.line);
    sites
}

fn collect_block_sites(
    block: &Block,
    method: &crate::lang::Method,
    program: &Program,
    out: &mut Vec<Site>,
) {
    for stmt in &block.stmts {
        let mut exprs: Vec<&Expr> = Vec::new();
        match &stmt.kind {
            StmtKind::VarDecl { init: Some(e), .. } => exprs.push(e),
            StmtKind::Assign { rhs, .. } => exprs.push(rhs),
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                exprs.push(cond);
                collect_block_sites(then_block, method, program, out);
                collect_block_sites(else_block, method, program, out);
            }
            StmtKind::While { cond, body, .. } => {
                // Invariants and decreases are specification lines: excluded.
                exprs.push(cond);
                collect_block_sites(body, method, program, out);
            }
            StmtKind::Return { values } => exprs.extend(values.iter()),
            StmtKind::Block(b) => {
                collect_block_sites(b, method, program, out);
                continue;
            }
            _ => {}
        }
        if exprs.is_empty() {
            continue;
        }
        let mut site = Site {
            line: stmt.line,
            text: program.line_text(stmt.line).unwrap_or_default().to_string(),
            ops: Vec::new(),
            negs: Vec::new(),
            consts: Vec::new(),
            vars: Vec::new(),
        };
        for e in exprs {
            collect_expr_tokens(e, method, stmt.line, &mut site);
        }
        site.ops.sort_by_key(|t| t.col);
        site.negs.sort_unstable();
        site.consts.sort_by_key(|t| t.col);
        site.vars.sort_by_key(|t| t.col);
        let qualifies = !site.ops.is_empty()
            || !site.negs.is_empty()
            || !site.consts.is_empty()
            || site.distinct_var_names() >= 2;
        if qualifies {
            out.push(site);
        }
    }
}

fn collect_expr_tokens(e: &Expr, method: &crate::lang::Method, line: u32, site: &mut Site) {
    let span = e.span();
    match e {
        Expr::IntLit(v, _) => {
            if span.line == line {
                site.consts.push(ConstToken {
                    col: span.col,
                    len: span.len,
                    value: *v,
                });
            }
        }
        Expr::BoolLit(..) => {}
        Expr::Var(name, _) => {
            if span.line == line && method.symbol_table.get(name) == Some(&Type::Int) {
                site.vars.push(VarToken {
                    col: span.col,
                    len: span.len,
                    name: name.clone(),
                });
            }
        }
        Expr::Unary(op, inner, _) => {
            if *op == UnOp::Neg && span.line == line {
                site.negs.push(span.col);
            }
            collect_expr_tokens(inner, method, line, site);
        }
        Expr::Binary(op, lhs, rhs, _) => {
            if op.is_arithmetic() && span.line == line {
                site.ops.push(OpToken {
                    col: span.col,
                    op: op.symbol().chars().next().unwrap(),
                });
            }
            collect_expr_tokens(lhs, method, line, site);
            collect_expr_tokens(rhs, method, line, site);
        }
    }
}

/// Replace `[col, col+len)` (1-based columns, char counted) with `new`.
fn splice(text: &str, col: u32, len: u32, new: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let start = col as usize - 1;
    let end = start + len as usize;
    let mut out: String = chars[..start].iter().collect();
    out.push_str(new);
    out.extend(chars[end.min(chars.len())..].iter());
    out
}

fn record(strategy: Strategy, site: &Site, mutated: String, seed: u64) -> MutationRecord {
    MutationRecord {
        strategy,
        line: site.line,
        original_line: site.text.clone(),
        mutated_line: mutated,
        seed,
    }
}

/// Swap one binary arithmetic operator within its pair
/// (`+`/`-`, `*`/`/`, `%`/`/`; `/` flips to `*` or `%`).
pub fn mutate_operator(
    site: &Site,
    rng: &mut impl Rng,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    if site.ops.is_empty() {
        return Err(MutateError::NoOperator);
    }
    let pick = site.ops[rng.gen_range(0..site.ops.len())];
    let replacement = match pick.op {
        '+' => '-',
        '-' => '+',
        '*' => '/',
        '%' => '/',
        '/' => {
            if rng.gen_bool(0.5) {
                '*'
            } else {
                '%'
            }
        }
        other => unreachable!("not an arithmetic operator: {other}"),
    };
    let mutated = splice(&site.text, pick.col, 1, &replacement.to_string());
    Ok(record(Strategy::OperatorReplacement, site, mutated, seed))
}

/// Drop one unary minus. Used by the operator strategy on sites whose only
/// arithmetic is a sign (e.g. `return -x;`).
fn mutate_unary(site: &Site, rng: &mut impl Rng, seed: u64) -> Option<MutationRecord> {
    if site.negs.is_empty() {
        return None;
    }
    let col = site.negs[rng.gen_range(0..site.negs.len())];
    let mutated = splice(&site.text, col, 1, "");
    Some(record(Strategy::OperatorReplacement, site, mutated, seed))
}

/// Replace a non-zero constant `c` with a uniform draw from `[-c, +c] \ {c}`.
pub fn mutate_coefficient(
    site: &Site,
    rng: &mut impl Rng,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    let pool: Vec<&ConstToken> = site.consts.iter().filter(|c| c.value != 0).collect();
    if pool.is_empty() {
        return Err(MutateError::NoConstant);
    }
    let pick = pool[rng.gen_range(0..pool.len())];
    // gen_range over -c..c is exactly [-c, +c] without +c.
    let value = rng.gen_range(-pick.value..pick.value);
    let mutated = splice(&site.text, pick.col, pick.len, &value.to_string());
    Ok(record(
        Strategy::CoefficientModification,
        site,
        mutated,
        seed,
    ))
}

/// Apply a non-identity permutation to the variable occurrences.
pub fn mutate_reorder(
    site: &Site,
    rng: &mut impl Rng,
    seed: u64,
) -> Result<MutationRecord, MutateError> {
    if site.distinct_var_names() < 2 {
        return Err(MutateError::TooFewVariables);
    }
    let n = site.vars.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut chosen: Option<Vec<usize>> = None;
    for _ in 0..32 {
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let changes = perm
            .iter()
            .enumerate()
            .any(|(i, &p)| site.vars[p].name != site.vars[i].name);
        if changes {
            chosen = Some(perm.clone());
            break;
        }
    }
    let perm = chosen.unwrap_or_else(|| {
        // Fall back to swapping the first differing pair.
        let mut p: Vec<usize> = (0..n).collect();
        'outer: for i in 0..n {
            for j in i + 1..n {
                if site.vars[i].name != site.vars[j].name {
                    p.swap(i, j);
                    break 'outer;
                }
            }
        }
        p
    });
    // Splice right to left so earlier columns stay valid.
    let mut mutated = site.text.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(site.vars[i].col));
    for i in order {
        let target = &site.vars[i];
        let source = &site.vars[perm[i]];
        mutated = splice(&mutated, target.col, target.len, &source.name);
    }
    Ok(record(Strategy::VariableReordering, site, mutated, seed))
}

/// Operator replacement followed by coefficient modification on the same
/// line when both apply; otherwise whichever applies.
fn mutate_combined(site: &Site, rng: &mut impl Rng, seed: u64) -> Option<MutationRecord> {
    let op_part = mutate_operator(site, rng, seed).ok();
    let base_text = op_part
        .as_ref()
        .map(|r| r.mutated_line.clone())
        .unwrap_or_else(|| site.text.clone());
    // Operator splices are same-length, so constant spans stay valid.
    let staged = Site {
        text: base_text,
        ..site.clone()
    };
    let coef_part = mutate_coefficient(&staged, rng, seed).ok();
    let mutated = match (&op_part, &coef_part) {
        (_, Some(c)) => c.mutated_line.clone(),
        (Some(o), None) => o.mutated_line.clone(),
        (None, None) => return None,
    };
    Some(MutationRecord {
        strategy: Strategy::Combined,
        line: site.line,
        original_line: site.text.clone(),
        mutated_line: mutated,
        seed,
    })
}

fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn apply_strategy(
    strategy: Strategy,
    site: &Site,
    rng: &mut impl Rng,
    seed: u64,
) -> Option<MutationRecord> {
    match strategy {
        Strategy::OperatorReplacement => mutate_operator(site, rng, seed)
            .ok()
            .or_else(|| mutate_unary(site, rng, seed)),
        Strategy::CoefficientModification => mutate_coefficient(site, rng, seed).ok(),
        Strategy::VariableReordering => mutate_reorder(site, rng, seed).ok(),
        Strategy::Combined => mutate_combined(site, rng, seed),
    }
}

/// Generate verification-breaking mutants of a verified program.
///
/// Returns the kept mutants and the number of discarded candidates (still
/// verifying, duplicate after whitespace normalization, or no longer
/// parsing). A program with no sites returns `(vec![], 0)`; the caller
/// routes it to the failure set.
pub fn generate_bugs(
    p: &Program,
    strategies: &[Strategy],
    seed: u64,
    backend: &Backend,
) -> Result<(Vec<Mutant>, usize), MutateError> {
    if !verify_program(p, backend)? {
        let name = p
            .methods
            .first()
            .map(|m| m.name.clone())
            .unwrap_or_default();
        return Err(MutateError::SourceNotVerified(name));
    }
    let sites = find_sites(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::new();
    let mut discarded = 0usize;
    let mut seen: BTreeSet<(u32, String)> = BTreeSet::new();

    for &strategy in strategies {
        for site in &sites {
            let Some(rec) = apply_strategy(strategy, site, &mut rng, seed) else {
                continue;
            };
            if normalize_ws(&rec.mutated_line) == normalize_ws(&rec.original_line) {
                discarded += 1;
                continue;
            }
            if !seen.insert((rec.line, normalize_ws(&rec.mutated_line))) {
                discarded += 1;
                continue;
            }
            let mut lines = p.source_lines.clone();
            lines[rec.line as usize - 1] = rec.mutated_line.clone();
            let source = lines.join("\n");
            let unmarked = match parse_program(&source) {
                Ok(prog) => prog,
                Err(_) => {
                    discarded += 1;
                    continue;
                }
            };
            if verify_program(&unmarked, backend)? {
                discarded += 1;
                continue;
            }
            let marked = mark_line(&unmarked, rec.line)?;
            kept.push(Mutant {
                label: format!("{}_l{}", strategy.tag(), rec.line),
                record: rec,
                marked,
                unmarked,
            });
        }
    }
    Ok((kept, discarded))
}

/// 1-based line numbers where two programs' raw text differs.
pub fn diff_lines(a: &Program, b: &Program) -> Vec<u32> {
    let max = a.source_lines.len().max(b.source_lines.len());
    let mut out = Vec::new();
    for i in 0..max {
        let la = a.source_lines.get(i).map(String::as_str).unwrap_or("");
        let lb = b.source_lines.get(i).map(String::as_str).unwrap_or("");
        if la != lb {
            out.push(i as u32 + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{format_program, has_marker};

    fn brute() -> Backend {
        Backend::Brute { bound: 5 }
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    const ABS_FIXED: &str = "\
method abs(x: int) returns (res: int)
  ensures x >= 0 ==> res == x
  ensures x < 0 ==> res == -x
{
  if (x >= 0) {
    return x;
  } else {
    return -x;
  }
}";

    #[test]
    fn corrected_abs_has_a_unary_site() {
        let p = parse_program(ABS_FIXED).unwrap();
        let sites = find_sites(&p);
        // The guard qualifies through the literal 0 (degenerate: no strategy
        // applies to it), `return x;` does not qualify at all, and
        // `return -x;` qualifies through its unary minus.
        let lines: Vec<u32> = sites.iter().map(|s| s.line).collect();
        assert_eq!(lines, vec![5, 8]);
        assert_eq!(sites[1].negs.len(), 1);
        assert!(sites[1].ops.is_empty());
    }

    #[test]
    fn boolean_only_program_has_no_sites() {
        let p = parse_program(
            "\
method pick(a: bool, b: bool) returns (r: bool)
  ensures r == (a && b)
{
  r := a && b;
}",
        )
        .unwrap();
        assert!(find_sites(&p).is_empty());
    }

    #[test]
    fn site_descriptor_example() {
        let p = parse_program(
            "\
method m(a: int, b: int) returns (s: int)
  ensures s == a + 2 * b
{
  s := a + 2*b;
}",
        )
        .unwrap();
        let sites = find_sites(&p);
        assert_eq!(sites.len(), 1);
        let site = &sites[0];
        assert_eq!(site.line, 4);
        let ops: Vec<char> = site.ops.iter().map(|o| o.op).collect();
        assert_eq!(ops, vec!['+', '*']);
        let consts: Vec<i64> = site.consts.iter().map(|c| c.value).collect();
        assert_eq!(consts, vec![2]);
        let vars: Vec<&str> = site.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(vars, vec!["a", "b"]);
    }

    #[test]
    fn spec_lines_are_never_sites() {
        let p = parse_program(
            "\
method m(n: int) returns (s: int)
  requires n >= 0
  ensures 2 * s == n * (n + 1)
{
  var i := 0;
  s := 0;
  while (i != n)
    invariant 0 <= i && i <= n
    invariant 2 * s == i * (i + 1)
  {
    i := i + 1;
    s := s + i;
  }
}",
        )
        .unwrap();
        let site_lines: Vec<u32> = find_sites(&p).iter().map(|s| s.line).collect();
        // ensures (3) and invariants (8, 9) are excluded. Lines 5 and 6
        // carry the constant 0 (degenerate but still sites), the guard has
        // two distinct variables, and the body lines have arithmetic.
        assert_eq!(site_lines, vec![5, 6, 7, 11, 12]);
    }

    #[test]
    fn operator_swaps_stay_in_pairs() {
        let p = parse_program(
            "method m(x: int, y: int) returns (r: int)\n  ensures r == x + y\n{\n  r := x + y;\n}",
        )
        .unwrap();
        let site = &find_sites(&p)[0];
        let rec = mutate_operator(site, &mut rng(1), 1).unwrap();
        assert_eq!(rec.mutated_line.trim(), "r := x - y;");

        for (src, allowed) in [
            ("r := x * y;", vec!["r := x / y;"]),
            ("r := x % y;", vec!["r := x / y;"]),
            ("r := x / y;", vec!["r := x * y;", "r := x % y;"]),
        ] {
            let text = format!(
                "method m(x: int, y: int) returns (r: int)\n  ensures true\n{{\n  {src}\n}}"
            );
            let p = parse_program(&text).unwrap();
            let site = &find_sites(&p)[0];
            for seed in 0..6 {
                let rec = mutate_operator(site, &mut rng(seed), seed).unwrap();
                assert!(
                    allowed.contains(&rec.mutated_line.trim()),
                    "{} became {}",
                    src,
                    rec.mutated_line.trim()
                );
            }
        }
    }

    #[test]
    fn unary_sites_report_no_operator() {
        let p = parse_program(ABS_FIXED).unwrap();
        let site = &find_sites(&p)[1];
        assert!(matches!(
            mutate_operator(site, &mut rng(0), 0),
            Err(MutateError::NoOperator)
        ));
    }

    #[test]
    fn coefficient_range_excludes_original() {
        let p =
            parse_program("method m() returns (r: int)\n  ensures r == 5\n{\n  r := 5;\n}")
                .unwrap();
        let site = &find_sites(&p)[0];
        for seed in 0..64 {
            let rec = mutate_coefficient(site, &mut rng(seed), seed).unwrap();
            let v: i64 = rec
                .mutated_line
                .trim()
                .trim_start_matches("r :=")
                .trim_end_matches(';')
                .trim()
                .parse()
                .unwrap();
            assert!((-5..5).contains(&v), "drew {v}");
        }
        // c = 1 forces {-1, 0}.
        let p =
            parse_program("method m() returns (r: int)\n  ensures r == 1\n{\n  r := 1;\n}")
                .unwrap();
        let site = &find_sites(&p)[0];
        let mut values = BTreeSet::new();
        for seed in 0..32 {
            let rec = mutate_coefficient(site, &mut rng(seed), seed).unwrap();
            values.insert(rec.mutated_line.trim().to_string());
        }
        assert_eq!(
            values.into_iter().collect::<Vec<_>>(),
            vec!["r := -1;".to_string(), "r := 0;".to_string()]
        );
    }

    #[test]
    fn zero_constant_is_skipped() {
        let p =
            parse_program("method m() returns (r: int)\n  ensures r == 0\n{\n  r := 0;\n}")
                .unwrap();
        let site = &find_sites(&p)[0];
        assert!(matches!(
            mutate_coefficient(site, &mut rng(0), 0),
            Err(MutateError::NoConstant)
        ));
    }

    #[test]
    fn reorder_swaps_two_variables() {
        let p = parse_program(
            "method m(a: int, b: int) returns (r: int)\n  ensures r == a - b\n{\n  r := a - b;\n}",
        )
        .unwrap();
        let site = &find_sites(&p)[0];
        let rec = mutate_reorder(site, &mut rng(0), 0).unwrap();
        assert_eq!(rec.mutated_line.trim(), "r := b - a;");
    }

    #[test]
    fn reorder_requires_two_distinct_variables() {
        let p = parse_program(
            "method m(x: int) returns (r: int)\n  ensures r == x + x\n{\n  r := x + x;\n}",
        )
        .unwrap();
        let site = &find_sites(&p)[0];
        assert!(matches!(
            mutate_reorder(site, &mut rng(0), 0),
            Err(MutateError::TooFewVariables)
        ));
    }

    #[test]
    fn reorder_produces_nonidentity_permutations() {
        let p = parse_program(
            "method m(x: int, y: int, z: int) returns (r: int)\n  ensures r == x*y - z\n{\n  r := x*y - z;\n}",
        )
        .unwrap();
        let site = &find_sites(&p)[0];
        for seed in 0..32 {
            let rec = mutate_reorder(site, &mut rng(seed), seed).unwrap();
            assert_ne!(
                normalize_ws(&rec.mutated_line),
                normalize_ws(&rec.original_line),
                "seed {seed} produced the identity"
            );
            assert!(rec.mutated_line.trim().starts_with("r :="));
        }
    }

    #[test]
    fn generate_bugs_keeps_the_unary_flip_on_abs() {
        let p = parse_program(ABS_FIXED).unwrap();
        let (kept, _) =
            generate_bugs(&p, &[Strategy::OperatorReplacement], 7, &brute()).unwrap();
        assert_eq!(kept.len(), 1);
        let m = &kept[0];
        assert_eq!(m.record.line, 8);
        assert_eq!(m.record.mutated_line.trim(), "return x;");
        // Kept means it fails verification.
        assert!(!verify_program(&m.unmarked, &brute()).unwrap());
    }

    #[test]
    fn program_without_sites_returns_empty() {
        let p = parse_program(
            "\
method pick(a: bool) returns (r: bool)
  ensures r == a
{
  r := a;
}",
        )
        .unwrap();
        let (kept, discarded) = generate_bugs(&p, &Strategy::ALL, 1, &brute()).unwrap();
        assert!(kept.is_empty());
        assert_eq!(discarded, 0);
        assert!(find_sites(&p).is_empty());
    }

    #[test]
    fn commutative_reorder_is_discarded() {
        let p = parse_program(
            "\
method add(a: int, b: int) returns (r: int)
  ensures r == a + b
{
  r := a + b;
}",
        )
        .unwrap();
        let (kept, discarded) =
            generate_bugs(&p, &[Strategy::VariableReordering], 3, &brute()).unwrap();
        assert!(kept.is_empty());
        assert_eq!(discarded, 1);
    }

    #[test]
    fn unverified_source_is_rejected() {
        let p =
            parse_program("method m() returns (r: int)\n  ensures r == 1\n{\n  r := 2;\n}")
                .unwrap();
        assert!(matches!(
            generate_bugs(&p, &Strategy::ALL, 1, &brute()),
            Err(MutateError::SourceNotVerified(_))
        ));
    }

    #[test]
    fn kept_mutants_differ_on_exactly_one_line() {
        let p = parse_program(
            "\
method linear(x: int, y: int) returns (r: int)
  ensures r == 3 * x + 2 * y
{
  r := 3 * x + 2 * y;
}",
        )
        .unwrap();
        let (kept, _) = generate_bugs(&p, &Strategy::ALL, 11, &brute()).unwrap();
        assert!(!kept.is_empty());
        for m in &kept {
            let changed = diff_lines(&p, &m.unmarked);
            assert_eq!(changed, vec![m.record.line]);
            // Marked and unmarked differ only by the trailing marker.
            let marked_changed = diff_lines(&m.marked, &m.unmarked);
            assert_eq!(marked_changed, vec![m.record.line]);
            let marked_line = m.marked.line_text(m.record.line).unwrap();
            assert!(has_marker(marked_line));
            assert!(marked_line.starts_with(m.unmarked.line_text(m.record.line).unwrap()));
        }
    }

    #[test]
    fn same_seed_is_bit_reproducible() {
        let p = parse_program(
            "\
method linear(x: int, y: int) returns (r: int)
  ensures r == 3 * x + 2 * y
{
  r := 3 * x + 2 * y;
}",
        )
        .unwrap();
        let (kept1, d1) = generate_bugs(&p, &Strategy::ALL, 42, &brute()).unwrap();
        let (kept2, d2) = generate_bugs(&p, &Strategy::ALL, 42, &brute()).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(kept1.len(), kept2.len());
        for (a, b) in kept1.iter().zip(&kept2) {
            assert_eq!(a.record, b.record);
            assert_eq!(format_program(&a.marked), format_program(&b.marked));
        }
        let (kept3, _) = generate_bugs(&p, &Strategy::ALL, 43, &brute()).unwrap();
        let texts1: Vec<&str> = kept1.iter().map(|m| m.record.mutated_line.as_str()).collect();
        let texts3: Vec<&str> = kept3.iter().map(|m| m.record.mutated_line.as_str()).collect();
        assert_ne!(texts1, texts3, "different seeds should explore differently");
    }
}
