//! Hand-rolled lexer with exact token positions.

use std::collections::BTreeSet;

use super::ast::Span;
use super::LangError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    KwMethod,
    KwReturns,
    KwRequires,
    KwEnsures,
    KwVar,
    KwIf,
    KwElse,
    KwWhile,
    KwInvariant,
    KwDecreases,
    KwReturn,
    KwTrue,
    KwFalse,
    KwInt,
    KwBool,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Assign,  // :=
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Neq,
    AndAnd,
    OrOr,
    Implies, // ==>
    Not,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::KwMethod => "`method`".into(),
            TokenKind::KwReturns => "`returns`".into(),
            TokenKind::KwRequires => "`requires`".into(),
            TokenKind::KwEnsures => "`ensures`".into(),
            TokenKind::KwVar => "`var`".into(),
            TokenKind::KwIf => "`if`".into(),
            TokenKind::KwElse => "`else`".into(),
            TokenKind::KwWhile => "`while`".into(),
            TokenKind::KwInvariant => "`invariant`".into(),
            TokenKind::KwDecreases => "`decreases`".into(),
            TokenKind::KwReturn => "`return`".into(),
            TokenKind::KwTrue => "`true`".into(),
            TokenKind::KwFalse => "`false`".into(),
            TokenKind::KwInt => "`int`".into(),
            TokenKind::KwBool => "`bool`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Assign => "`:=`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Percent => "`%`".into(),
            TokenKind::Lt => "`<`".into(),
            TokenKind::Le => "`<=`".into(),
            TokenKind::Gt => "`>`".into(),
            TokenKind::Ge => "`>=`".into(),
            TokenKind::EqEq => "`==`".into(),
            TokenKind::Neq => "`!=`".into(),
            TokenKind::AndAnd => "`&&`".into(),
            TokenKind::OrOr => "`||`".into(),
            TokenKind::Implies => "`==>`".into(),
            TokenKind::Not => "`!`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Dafny constructs recognized but outside the subset. Using one anywhere
/// is an `UnsupportedConstruct` error rather than a mysterious syntax error.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "array", "seq", "set", "map", "imap", "multiset", "ghost", "class", "trait", "datatype",
    "codatatype", "function", "predicate", "lemma", "forall", "exists", "reads", "modifies",
    "old", "fresh", "assert", "assume", "match", "case", "new", "null", "real", "char",
    "string", "nat", "object", "iterator", "import", "module", "include", "twostate", "calc",
    "label", "break", "continue", "yield", "static", "abstract", "opaque", "reveal", "print",
];

pub struct LexOutput {
    pub tokens: Vec<Token>,
    /// Lines whose trailing comment is exactly `buggy line`.
    pub marker_lines: BTreeSet<u32>,
}

/// Tokenize `source`. Comments run `//` to end of line; `//buggy line`
/// trailing comments are collected as statement markers.
pub fn lex(source: &str) -> Result<LexOutput, LangError> {
    let mut tokens = Vec::new();
    let mut marker_lines = BTreeSet::new();
    for (i, line_text) in source.lines().enumerate() {
        let line = i as u32 + 1;
        lex_line_into(line_text, line, &mut tokens, &mut marker_lines)?;
    }
    Ok(LexOutput {
        tokens,
        marker_lines,
    })
}

/// Tokenize a single line of text as line number `line`.
///
/// Also used stand-alone on candidate patch lines and by the mock model.
pub fn lex_line(text: &str, line: u32) -> Result<Vec<Token>, LangError> {
    let mut tokens = Vec::new();
    let mut markers = BTreeSet::new();
    lex_line_into(text, line, &mut tokens, &mut markers)?;
    Ok(tokens)
}

fn lex_line_into(
    text: &str,
    line: u32,
    tokens: &mut Vec<Token>,
    marker_lines: &mut BTreeSet<u32>,
) -> Result<(), LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let col = i as u32 + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            let comment: String = chars[i + 2..].iter().collect();
            if comment.trim() == "buggy line" {
                marker_lines.insert(line);
            }
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let span = Span::new(line, col, (i - start) as u32);
            let kind = match word.as_str() {
                "method" => TokenKind::KwMethod,
                "returns" => TokenKind::KwReturns,
                "requires" => TokenKind::KwRequires,
                "ensures" => TokenKind::KwEnsures,
                "var" => TokenKind::KwVar,
                "if" => TokenKind::KwIf,
                "else" => TokenKind::KwElse,
                "while" => TokenKind::KwWhile,
                "invariant" => TokenKind::KwInvariant,
                "decreases" => TokenKind::KwDecreases,
                "return" => TokenKind::KwReturn,
                "true" => TokenKind::KwTrue,
                "false" => TokenKind::KwFalse,
                "int" => TokenKind::KwInt,
                "bool" => TokenKind::KwBool,
                _ if UNSUPPORTED_KEYWORDS.contains(&word.as_str()) => {
                    return Err(LangError::Unsupported {
                        line,
                        construct: word,
                    });
                }
                _ => TokenKind::Ident(word),
            };
            tokens.push(Token { kind, span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let value: i64 = digits.parse().map_err(|_| LangError::Syntax {
                line,
                col,
                expected: "integer literal within i64 range".into(),
            })?;
            tokens.push(Token {
                kind: TokenKind::Int(value),
                span: Span::new(line, col, (i - start) as u32),
            });
            continue;
        }
        // Multi-char operators, longest first.
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (kind, len): (TokenKind, usize) = if rest.starts_with("==>") {
            (TokenKind::Implies, 3)
        } else if rest.starts_with(":=") {
            (TokenKind::Assign, 2)
        } else if rest.starts_with("==") {
            (TokenKind::EqEq, 2)
        } else if rest.starts_with("!=") {
            (TokenKind::Neq, 2)
        } else if rest.starts_with("<=") {
            (TokenKind::Le, 2)
        } else if rest.starts_with(">=") {
            (TokenKind::Ge, 2)
        } else if rest.starts_with("&&") {
            (TokenKind::AndAnd, 2)
        } else if rest.starts_with("||") {
            (TokenKind::OrOr, 2)
        } else {
            let kind = match c {
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '{' => TokenKind::LBrace,
                '}' => TokenKind::RBrace,
                ',' => TokenKind::Comma,
                ';' => TokenKind::Semi,
                ':' => TokenKind::Colon,
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '%' => TokenKind::Percent,
                '<' => TokenKind::Lt,
                '>' => TokenKind::Gt,
                '!' => TokenKind::Not,
                '[' | ']' => {
                    return Err(LangError::Unsupported {
                        line,
                        construct: "index/array syntax".into(),
                    })
                }
                '.' => {
                    return Err(LangError::Unsupported {
                        line,
                        construct: "member access".into(),
                    })
                }
                other => {
                    return Err(LangError::Syntax {
                        line,
                        col,
                        expected: format!("a token (found `{other}`)"),
                    })
                }
            };
            (kind, 1)
        };
        tokens.push(Token {
            kind,
            span: Span::new(line, col, len as u32),
        });
        i += len;
    }
    Ok(())
}
