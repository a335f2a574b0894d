//! Parser, AST and line-oriented editing for the contract-annotated
//! mini-language (a syntactic subset of Dafny: `int`/`bool`, assignments,
//! `if`/`else`, `while` with invariants, multi-valued `return`).
//!
//! Source files are kept line-addressable end to end: the [`Program`] retains
//! its raw lines verbatim, statements occupy exactly one line each, and
//! patches replace a single line and re-parse.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod typeck;

use thiserror::Error;

pub use ast::{has_marker, BinOp, Block, Expr, Method, Param, Program, Span, Stmt, StmtKind, Type, UnOp};
pub use parser::parse_expr_str;

pub const MARKER_COMMENT: &str = "//buggy line";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax { line: u32, col: u32, expected: String },
    #[error("type error at line {line}: {message}")]
    Type { line: u32, message: String },
    #[error("unsupported construct at line {line}: `{construct}` is outside the subset")]
    Unsupported { line: u32, construct: String },
    #[error("line {line} does not hold exactly one statement")]
    NotAStatementLine { line: u32 },
    #[error("patched line {line} does not re-parse: {cause}")]
    ReparseFailed { line: u32, cause: String },
}

/// Parse and type-check a source file.
pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let parser = parser::Parser::new(source)?;
    let mut program = parser.parse_program(source)?;
    typeck::typecheck(&mut program)?;
    typeck::check_returns(&program)?;
    Ok(program)
}

/// Emit source text. Line numbers of statements are preserved exactly: the
/// program's raw lines are the canonical representation.
pub fn format_program(p: &Program) -> String {
    let mut out = p.source_lines.join("\n");
    out.push('\n');
    out
}

/// Replace one statement line with `new_text` (re-indented to match) and
/// re-parse. All other lines are untouched.
pub fn replace_line(p: &Program, line: u32, new_text: &str) -> Result<Program, LangError> {
    let Some(original) = p.line_text(line) else {
        return Err(LangError::NotAStatementLine { line });
    };
    if p.statement_at(line).is_none() {
        return Err(LangError::NotAStatementLine { line });
    }
    let replacement = new_text.trim();
    if replacement.contains('\n') || replacement.is_empty() {
        return Err(LangError::ReparseFailed {
            line,
            cause: "replacement must be a single non-empty line".into(),
        });
    }
    let indent: String = original
        .chars()
        .take_while(|c| c.is_whitespace())
        .collect();
    let mut lines = p.source_lines.clone();
    lines[line as usize - 1] = format!("{indent}{replacement}");
    let source = lines.join("\n");
    parse_program(&source).map_err(|e| LangError::ReparseFailed {
        line,
        cause: e.to_string(),
    })
}

/// Append the `//buggy line` marker to a line (idempotent) and re-parse.
pub fn mark_line(p: &Program, line: u32) -> Result<Program, LangError> {
    let Some(original) = p.line_text(line) else {
        return Err(LangError::NotAStatementLine { line });
    };
    if has_marker(original) {
        return Ok(p.clone());
    }
    let mut lines = p.source_lines.clone();
    lines[line as usize - 1] = format!("{} {}", original.trim_end(), MARKER_COMMENT);
    let source = lines.join("\n");
    parse_program(&source).map_err(|e| LangError::ReparseFailed {
        line,
        cause: e.to_string(),
    })
}
