//! Forward state propagation with Hoare rules.
//!
//! Each method is walked path by path with a symbolic store mapping every
//! variable to its current value over input symbols. Statements contribute
//! attributed [`StateCondition`]s; control points (returns, loop boundaries,
//! the implicit exit) emit [`Entailment`]s of the form
//! `accumulated state => specification clause` whose failure localizes a
//! fault:
//!
//! - assignment `x := E` updates the store with the substituted right-hand
//!   side and records `x == store[x]`, replacing any previous fact that
//!   defined `x` (successive updates to one variable therefore fold into the
//!   last writer's fact);
//! - `if` forks the path, adding the guard or its negation as
//!   precondition-origin facts;
//! - `while` emits initialization entailments, havocs every variable the
//!   body assigns (fresh `x@k` symbols), assumes the invariants and guard,
//!   propagates the body to emit maintenance entailments, and continues after
//!   the loop from `invariants && !guard`. Termination is not checked:
//!   `decreases` clauses are parsed, ignored, and reported as warnings.
//! - `return` binds the out-values and emits one postcondition entailment per
//!   `ensures` clause; paths that fall off the end do the same at the
//!   closing brace.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{BinOp, Block, Expr, Method, Span, Stmt, StmtKind, Type, UnOp};

/// Paths are forked at every `if`; this bounds the blow-up.
pub const DEFAULT_PATH_CAP: usize = 256;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HoareError {
    #[error("path explosion: more than {limit} forked contexts in one method")]
    PathExplosion { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// From `requires` clauses, branch guards, or loop-structure assumptions.
    Precondition,
    /// Contributed by the statement on this line.
    Statement(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyState {
    Unchecked,
    Holds,
    Failed,
}

/// One logical fact about program state, attributed to its producer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCondition {
    pub formula: Expr,
    pub origin: Origin,
    pub verified: VerifyState,
}

impl StateCondition {
    fn new(formula: Expr, origin: Origin) -> Self {
        StateCondition {
            formula,
            origin,
            verified: VerifyState::Unchecked,
        }
    }
}

/// Per-statement record of what held before and after one visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementContext {
    pub line: u32,
    pub incoming: Vec<StateCondition>,
    pub outgoing: Vec<StateCondition>,
    /// Variable values in terms of method inputs and fresh symbols, after the
    /// statement.
    pub store: BTreeMap<String, Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntailmentKind {
    Postcondition,
    LoopInit,
    LoopMaintain,
}

/// `hypothesis => conclusion`, checked by the `entail` module.
///
/// Ids are dense per method, assigned in generation order, and always
/// compared numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entailment {
    pub id: u32,
    pub kind: EntailmentKind,
    pub hypothesis: Vec<StateCondition>,
    pub conclusion: Expr,
    /// The return/loop/exit line this entailment was generated at.
    pub control_point: u32,
    /// Free symbols of hypothesis and conclusion in first-use order, with
    /// types. Fresh symbols `x@k` take the type of `x`.
    pub symbols: Vec<(String, Type)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub contexts: Vec<StatementContext>,
    pub entailments: Vec<Entailment>,
    pub warnings: Vec<String>,
}

/// Substitute `value` for every occurrence of `var` in `formula`.
/// The AST representation parenthesizes as needed on display, so the
/// substitution is capture-free by construction (the language has no
/// binders).
pub fn substitute(formula: &Expr, var: &str, value: &Expr) -> Expr {
    match formula {
        Expr::Var(name, _) if name == var => value.clone(),
        Expr::IntLit(..) | Expr::BoolLit(..) | Expr::Var(..) => formula.clone(),
        Expr::Unary(op, inner, span) => {
            Expr::Unary(*op, Box::new(substitute(inner, var, value)), *span)
        }
        Expr::Binary(op, lhs, rhs, span) => Expr::Binary(
            *op,
            Box::new(substitute(lhs, var, value)),
            Box::new(substitute(rhs, var, value)),
            *span,
        ),
    }
}

/// Negate a boolean expression, flipping comparisons instead of wrapping
/// them (`!(x >= 0)` becomes `x < 0`, matching how guards read in reports).
pub fn negate(e: &Expr) -> Expr {
    let span = e.span();
    match e {
        Expr::BoolLit(b, s) => Expr::BoolLit(!b, *s),
        Expr::Unary(UnOp::Not, inner, _) => inner.as_ref().clone(),
        Expr::Binary(op, lhs, rhs, s) => {
            let flipped = match op {
                BinOp::Lt => Some(BinOp::Ge),
                BinOp::Le => Some(BinOp::Gt),
                BinOp::Gt => Some(BinOp::Le),
                BinOp::Ge => Some(BinOp::Lt),
                BinOp::Eq => Some(BinOp::Neq),
                BinOp::Neq => Some(BinOp::Eq),
                _ => None,
            };
            match flipped {
                Some(f) => Expr::Binary(f, lhs.clone(), rhs.clone(), *s),
                None => Expr::Unary(UnOp::Not, Box::new(e.clone()), span),
            }
        }
        _ => Expr::Unary(UnOp::Not, Box::new(e.clone()), span),
    }
}

/// Every line that writes a variable (declarations with initializers and
/// assignments), in source order.
pub fn assignment_sites(m: &Method) -> Vec<(u32, String)> {
    let mut out = Vec::new();
    collect_sites(&m.body, &mut out);
    out
}

fn collect_sites(block: &Block, out: &mut Vec<(u32, String)>) {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::VarDecl {
                name,
                init: Some(_),
                ..
            } => out.push((stmt.line, name.clone())),
            StmtKind::Assign { target, .. } => out.push((stmt.line, target.clone())),
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                collect_sites(then_block, out);
                collect_sites(else_block, out);
            }
            StmtKind::While { body, .. } => collect_sites(body, out),
            StmtKind::Block(b) => collect_sites(b, out),
            _ => {}
        }
    }
}

#[derive(Debug, Clone)]
struct PathState {
    conditions: Vec<StateCondition>,
    /// Index into `conditions` of the fact currently defining each variable.
    defining: BTreeMap<String, usize>,
    store: BTreeMap<String, Expr>,
}

impl PathState {
    fn push(&mut self, cond: StateCondition) {
        self.conditions.push(cond);
    }

    /// Install `var == value` as the defining fact for `var`, replacing any
    /// previous one. This is where successive updates fold.
    fn define(&mut self, var: &str, value: Expr, origin: Origin) {
        self.store.insert(var.to_string(), value.clone());
        if let Some(idx) = self.defining.remove(var) {
            self.conditions.remove(idx);
            for v in self.defining.values_mut() {
                if *v > idx {
                    *v -= 1;
                }
            }
        }
        let span = value.span();
        let formula = Expr::Binary(
            BinOp::Eq,
            Box::new(Expr::Var(var.to_string(), span)),
            Box::new(value),
            span,
        );
        self.conditions.push(StateCondition::new(formula, origin));
        self.defining
            .insert(var.to_string(), self.conditions.len() - 1);
    }
}

struct Engine<'m> {
    method: &'m Method,
    fresh_counter: u32,
    next_id: u32,
    contexts: Vec<StatementContext>,
    entailments: Vec<Entailment>,
    warnings: Vec<String>,
    path_cap: usize,
}

impl<'m> Engine<'m> {
    fn fresh(&mut self, var: &str) -> Expr {
        self.fresh_counter += 1;
        Expr::Var(format!("{var}@{}", self.fresh_counter), Span::new(1, 1, 1))
    }

    /// Rewrite `e` over input/fresh symbols using the path's store. Parameters
    /// are their own symbols; anything else must have a store entry (the type
    /// checker's definite-assignment pass guarantees it).
    fn subst_store(&self, e: &Expr, store: &BTreeMap<String, Expr>) -> Expr {
        match e {
            Expr::Var(name, _) => match store.get(name) {
                Some(value) => value.clone(),
                None => e.clone(),
            },
            Expr::IntLit(..) | Expr::BoolLit(..) => e.clone(),
            Expr::Unary(op, inner, span) => {
                Expr::Unary(*op, Box::new(self.subst_store(inner, store)), *span)
            }
            Expr::Binary(op, lhs, rhs, span) => Expr::Binary(
                *op,
                Box::new(self.subst_store(lhs, store)),
                Box::new(self.subst_store(rhs, store)),
                *span,
            ),
        }
    }

    fn emit(&mut self, kind: EntailmentKind, path: &PathState, conclusion: &Expr, at: u32) {
        let hypothesis = path.conditions.clone();
        let mut symbols: Vec<(String, Type)> = Vec::new();
        let mut add = |name: &str, method: &Method| {
            if symbols.iter().any(|(n, _)| n == name) {
                return;
            }
            let base = name.split('@').next().unwrap_or(name);
            let ty = method.symbol_table.get(base).copied().unwrap_or(Type::Int);
            symbols.push((name.to_string(), ty));
        };
        for cond in &hypothesis {
            for v in cond.formula.free_vars() {
                add(&v, self.method);
            }
        }
        for v in conclusion.free_vars() {
            add(&v, self.method);
        }
        self.entailments.push(Entailment {
            id: self.next_id,
            kind,
            hypothesis,
            conclusion: conclusion.clone(),
            control_point: at,
            symbols,
        });
        self.next_id += 1;
    }

    fn emit_postconditions(&mut self, path: &PathState, at: u32) {
        for ensure in self.method.ensures.clone() {
            self.emit(EntailmentKind::Postcondition, path, &ensure, at);
        }
    }

    fn check_cap(&self, live: usize) -> Result<(), HoareError> {
        if live > self.path_cap {
            return Err(HoareError::PathExplosion {
                limit: self.path_cap,
            });
        }
        Ok(())
    }

    fn run_block(
        &mut self,
        block: &Block,
        paths: Vec<PathState>,
    ) -> Result<Vec<PathState>, HoareError> {
        let mut current = paths;
        for stmt in &block.stmts {
            if current.is_empty() {
                break; // all paths returned; the tail is dead code
            }
            current = self.run_stmt(stmt, current)?;
            self.check_cap(current.len())?;
        }
        Ok(current)
    }

    fn run_stmt(
        &mut self,
        stmt: &Stmt,
        paths: Vec<PathState>,
    ) -> Result<Vec<PathState>, HoareError> {
        let mut out = Vec::new();
        for mut path in paths {
            let incoming = path.conditions.clone();
            match &stmt.kind {
                StmtKind::VarDecl { name, init, .. } => {
                    if let Some(e) = init {
                        let value = self.subst_store(e, &path.store);
                        path.define(name, value, Origin::Statement(stmt.line));
                    }
                    self.record(stmt.line, incoming, &path);
                    out.push(path);
                }
                StmtKind::Assign { target, rhs } => {
                    let value = self.subst_store(rhs, &path.store);
                    path.define(target, value, Origin::Statement(stmt.line));
                    self.record(stmt.line, incoming, &path);
                    out.push(path);
                }
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    let guard = self.subst_store(cond, &path.store);
                    let mut then_path = path.clone();
                    then_path.push(StateCondition::new(guard.clone(), Origin::Precondition));
                    let mut else_path = path.clone();
                    else_path.push(StateCondition::new(negate(&guard), Origin::Precondition));
                    self.record(stmt.line, incoming, &path);
                    let mut survivors = self.run_block(then_block, vec![then_path])?;
                    survivors.extend(self.run_block(else_block, vec![else_path])?);
                    self.check_cap(out.len() + survivors.len())?;
                    out.extend(survivors);
                }
                StmtKind::While {
                    cond,
                    invariants,
                    decreases,
                    body,
                } => {
                    if decreases.is_some() {
                        self.warnings.push(format!(
                            "line {}: `decreases` is parsed but not checked; \
                             only partial correctness is verified",
                            stmt.line
                        ));
                    }
                    // Initialization: state before the loop must imply each invariant.
                    for inv in invariants {
                        self.emit(EntailmentKind::LoopInit, &path, inv, stmt.line);
                    }
                    let modified: Vec<String> = {
                        let mut vars: Vec<(u32, String)> = Vec::new();
                        collect_sites(body, &mut vars);
                        let mut names: Vec<String> = vars.into_iter().map(|(_, v)| v).collect();
                        names.sort();
                        names.dedup();
                        names
                    };

                    // An arbitrary iteration: havoc what the body writes, then
                    // assume the invariants and the guard.
                    let mut iter_path = path.clone();
                    for var in &modified {
                        let sym = self.fresh(var);
                        iter_path.define(var, sym, Origin::Precondition);
                    }
                    for inv in invariants {
                        let assumed = self.subst_store(inv, &iter_path.store);
                        iter_path.push(StateCondition::new(assumed, Origin::Precondition));
                    }
                    let guard = self.subst_store(cond, &iter_path.store);
                    iter_path.push(StateCondition::new(guard, Origin::Precondition));

                    // Maintenance: every body path that falls through must
                    // re-establish each invariant.
                    let body_exits = self.run_block(body, vec![iter_path])?;
                    for body_path in &body_exits {
                        for inv in invariants {
                            self.emit(EntailmentKind::LoopMaintain, body_path, inv, stmt.line);
                        }
                    }

                    // After the loop: a second havoc, then invariants && !guard.
                    let mut after = path;
                    for var in &modified {
                        let sym = self.fresh(var);
                        after.define(var, sym, Origin::Precondition);
                    }
                    for inv in invariants {
                        let assumed = self.subst_store(inv, &after.store);
                        after.push(StateCondition::new(assumed, Origin::Precondition));
                    }
                    let exit_guard = self.subst_store(cond, &after.store);
                    after.push(StateCondition::new(
                        negate(&exit_guard),
                        Origin::Precondition,
                    ));
                    self.record(stmt.line, incoming, &after);
                    out.push(after);
                }
                StmtKind::Return { values } => {
                    let returns = self.method.returns.clone();
                    for (value, ret) in values.iter().zip(&returns) {
                        let bound = self.subst_store(value, &path.store);
                        path.define(&ret.name, bound, Origin::Statement(stmt.line));
                    }
                    self.record(stmt.line, incoming, &path);
                    self.emit_postconditions(&path, stmt.line);
                    // The path terminates here.
                }
                StmtKind::Block(b) => {
                    let survivors = self.run_block(b, vec![path])?;
                    out.extend(survivors);
                }
            }
        }
        Ok(out)
    }

    fn record(&mut self, line: u32, incoming: Vec<StateCondition>, path: &PathState) {
        self.contexts.push(StatementContext {
            line,
            incoming,
            outgoing: path.conditions.clone(),
            store: path.store.clone(),
        });
    }
}

pub fn propagate(m: &Method) -> Result<Propagation, HoareError> {
    propagate_with_cap(m, DEFAULT_PATH_CAP)
}

pub fn propagate_with_cap(m: &Method, path_cap: usize) -> Result<Propagation, HoareError> {
    let mut engine = Engine {
        method: m,
        fresh_counter: 0,
        next_id: 0,
        contexts: Vec::new(),
        entailments: Vec::new(),
        warnings: Vec::new(),
        path_cap,
    };
    let mut init = PathState {
        conditions: Vec::new(),
        defining: BTreeMap::new(),
        store: BTreeMap::new(),
    };
    for p in &m.params {
        init.store
            .insert(p.name.clone(), Expr::Var(p.name.clone(), Span::new(1, 1, 1)));
    }
    for req in &m.requires {
        init.push(StateCondition::new(req.clone(), Origin::Precondition));
    }
    let exits = engine.run_block(&m.body, vec![init])?;
    for path in &exits {
        engine.emit_postconditions(path, m.end_line);
    }
    Ok(Propagation {
        contexts: engine.contexts,
        entailments: engine.entailments,
        warnings: engine.warnings,
    })
}
