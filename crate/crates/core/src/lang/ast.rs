//! AST for the contract-annotated mini-language.
//!
//! The language is a small imperative subset sufficient for integer
//! arithmetic programs with `requires`/`ensures` contracts and loop
//! invariants: `int`/`bool` values, assignments, `if`/`else`, `while`,
//! and (possibly tuple-valued) `return`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Position of a token in the source: 1-based line and column, length in chars.
///
/// Composite expression nodes are anchored at their operator token so that
/// line-oriented passes (mutation, patching) can splice exact token ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, len: u32) -> Self {
        Span { line, col, len }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Neq,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        )
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Neq
        )
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
        }
    }

    /// Binding strength for parsing and printing. `==>` is lowest and
    /// right-associative; everything else is left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Neq => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    IntLit(i64, Span),
    BoolLit(bool, Span),
    Var(String, Span),
    Unary(UnOp, Box<Expr>, Span),
    Binary(BinOp, Box<Expr>, Box<Expr>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::IntLit(_, s)
            | Expr::BoolLit(_, s)
            | Expr::Var(_, s)
            | Expr::Unary(_, _, s)
            | Expr::Binary(_, _, _, s) => *s,
        }
    }

    /// Structural equality ignoring spans.
    pub fn eq_modulo_spans(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::IntLit(a, _), Expr::IntLit(b, _)) => a == b,
            (Expr::BoolLit(a, _), Expr::BoolLit(b, _)) => a == b,
            (Expr::Var(a, _), Expr::Var(b, _)) => a == b,
            (Expr::Unary(op1, e1, _), Expr::Unary(op2, e2, _)) => {
                op1 == op2 && e1.eq_modulo_spans(e2)
            }
            (Expr::Binary(op1, l1, r1, _), Expr::Binary(op2, l2, r2, _)) => {
                op1 == op2 && l1.eq_modulo_spans(l2) && r1.eq_modulo_spans(r2)
            }
            _ => false,
        }
    }

    /// Free variables in first-occurrence order (duplicates removed).
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::IntLit(..) | Expr::BoolLit(..) => {}
            Expr::Var(name, _) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            Expr::Unary(_, e, _) => e.collect_vars(out),
            Expr::Binary(_, l, r, _) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, parent_prec: u8) -> fmt::Result {
    match e {
        Expr::IntLit(v, _) => write!(f, "{v}"),
        Expr::BoolLit(b, _) => write!(f, "{b}"),
        Expr::Var(name, _) => write!(f, "{name}"),
        Expr::Unary(op, inner, _) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            write!(f, "{sym}")?;
            // Unary binds tighter than any binary operator.
            match inner.as_ref() {
                Expr::Binary(..) => {
                    write!(f, "(")?;
                    write_expr(f, inner, 0)?;
                    write!(f, ")")
                }
                _ => write_expr(f, inner, 7),
            }
        }
        Expr::Binary(op, lhs, rhs, _) => {
            let prec = op.precedence();
            let needs_parens = prec < parent_prec;
            if needs_parens {
                write!(f, "(")?;
            }
            // Left-assoc: the right child needs parens at equal precedence.
            // Implies is right-assoc: the left child does.
            let (lp, rp) = if *op == BinOp::Implies {
                (prec + 1, prec)
            } else {
                (prec, prec + 1)
            };
            write_expr(f, lhs, lp)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, rhs, rp)?;
            if needs_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub open_line: u32,
    pub close_line: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
    /// Set when the statement's line carries a trailing `//buggy line` comment.
    pub marker: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    VarDecl {
        name: String,
        ty: Option<Type>,
        init: Option<Expr>,
    },
    Assign {
        target: String,
        rhs: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Block,
    },
    While {
        cond: Expr,
        invariants: Vec<Expr>,
        decreases: Option<Expr>,
        body: Block,
    },
    Return {
        values: Vec<Expr>,
    },
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Vec<Param>,
    pub requires: Vec<Expr>,
    pub ensures: Vec<Expr>,
    pub body: Block,
    /// Line of the `method` keyword.
    pub start_line: u32,
    /// Line of the body's closing brace (the implicit exit point).
    pub end_line: u32,
    /// Flat name-to-type table for params, returns and locals. Local names
    /// are unique per method (no shadowing in the subset), so one map serves
    /// the whole body.
    pub symbol_table: BTreeMap<String, Type>,
}

impl Method {
    /// All statements, depth first, in source order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        collect_stmts(&self.body, &mut out);
        out
    }

    /// Distinct lines holding a statement, ascending.
    pub fn statement_lines(&self) -> Vec<u32> {
        let mut lines: Vec<u32> = self.statements().iter().map(|s| s.line).collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p.name == name)
    }

    pub fn is_return(&self, name: &str) -> bool {
        self.returns.iter().any(|p| p.name == name)
    }
}

fn collect_stmts<'a>(block: &'a Block, out: &mut Vec<&'a Stmt>) {
    for stmt in &block.stmts {
        out.push(stmt);
        match &stmt.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                collect_stmts(then_block, out);
                collect_stmts(else_block, out);
            }
            StmtKind::While { body, .. } => collect_stmts(body, out),
            StmtKind::Block(b) => collect_stmts(b, out),
            _ => {}
        }
    }
}

/// A parsed source file: typed methods plus the raw lines they came from.
///
/// The raw lines are retained verbatim so that patching and mutation are
/// line-oriented and never disturb unrelated lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub methods: Vec<Method>,
    pub source_lines: Vec<String>,
}

impl Program {
    /// Raw text of a 1-based line, if it exists.
    pub fn line_text(&self, line: u32) -> Option<&str> {
        self.source_lines.get(line as usize - 1).map(|s| s.as_str())
    }

    /// The statement occupying `line`, if exactly one does.
    pub fn statement_at(&self, line: u32) -> Option<(&Method, &Stmt)> {
        for m in &self.methods {
            for s in m.statements() {
                if s.line == line {
                    return Some((m, s));
                }
            }
        }
        None
    }

    /// The method whose extent covers `line`.
    pub fn method_at(&self, line: u32) -> Option<&Method> {
        self.methods
            .iter()
            .find(|m| m.start_line <= line && line <= m.end_line)
    }

    /// Lines whose raw text ends with a `//buggy line` comment.
    pub fn marker_lines(&self) -> Vec<u32> {
        self.source_lines
            .iter()
            .enumerate()
            .filter(|(_, text)| has_marker(text))
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    /// `line -> statement` map over all methods; statement lines are unique.
    pub fn statement_line_map(&self) -> BTreeMap<u32, &Stmt> {
        let mut map = BTreeMap::new();
        for m in &self.methods {
            for s in m.statements() {
                map.insert(s.line, s);
            }
        }
        map
    }
}

/// True if the line's trailing comment is exactly `buggy line`.
pub fn has_marker(line: &str) -> bool {
    match line.rfind("//") {
        Some(idx) => line[idx + 2..].trim() == "buggy line",
        None => false,
    }
}
