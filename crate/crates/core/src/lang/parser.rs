//! Recursive descent parser for the subset grammar.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};
use super::LangError;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    marker_lines: BTreeSet<u32>,
}

impl Parser {
    pub fn new(source: &str) -> Result<Self, LangError> {
        let out = lex(source)?;
        Ok(Parser {
            tokens: out.tokens,
            pos: 0,
            marker_lines: out.marker_lines,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_span(&self) -> Span {
        self.tokens
            .last()
            .map(|t| t.span)
            .unwrap_or(Span::new(1, 1, 1))
    }

    fn err_here(&self, expected: &str) -> LangError {
        match self.peek() {
            Some(t) => LangError::Syntax {
                line: t.span.line,
                col: t.span.col,
                expected: format!("{expected}, found {}", t.kind.describe()),
            },
            None => {
                let s = self.last_span();
                LangError::Syntax {
                    line: s.line,
                    col: s.col + s.len,
                    expected: format!("{expected}, found end of input"),
                }
            }
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, LangError> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.next().unwrap()),
            _ => Err(self.err_here(what)),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), LangError> {
        match self.peek_kind() {
            Some(TokenKind::Ident(_)) => {
                let t = self.next().unwrap();
                match t.kind {
                    TokenKind::Ident(name) => Ok((name, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_here(what)),
        }
    }

    pub fn parse_program(mut self, source: &str) -> Result<Program, LangError> {
        let mut methods = Vec::new();
        while self.peek().is_some() {
            methods.push(self.parse_method()?);
        }
        if methods.is_empty() {
            return Err(LangError::Syntax {
                line: 1,
                col: 1,
                expected: "at least one `method` declaration".into(),
            });
        }
        let program = Program {
            methods,
            source_lines: source.lines().map(|l| l.to_string()).collect(),
        };
        enforce_one_statement_per_line(&program)?;
        Ok(program)
    }

    fn parse_method(&mut self) -> Result<Method, LangError> {
        let kw = self.expect(TokenKind::KwMethod, "`method`")?;
        let start_line = kw.span.line;
        let (name, _) = self.expect_ident("method name")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let params = self.parse_param_list()?;
        self.expect(TokenKind::RParen, "`)`")?;
        let mut returns = Vec::new();
        if self.peek_kind() == Some(&TokenKind::KwReturns) {
            self.next();
            self.expect(TokenKind::LParen, "`(` after `returns`")?;
            returns = self.parse_param_list()?;
            self.expect(TokenKind::RParen, "`)`")?;
        }
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            match self.peek_kind() {
                Some(TokenKind::KwRequires) => {
                    self.next();
                    requires.push(self.parse_expr()?);
                }
                Some(TokenKind::KwEnsures) => {
                    self.next();
                    ensures.push(self.parse_expr()?);
                }
                _ => break,
            }
        }
        let body = self.parse_block()?;
        let end_line = body.close_line;
        let mut method = Method {
            name,
            params,
            returns,
            requires,
            ensures,
            body,
            start_line,
            end_line,
            symbol_table: Default::default(),
        };
        self.apply_markers(&mut method.body);
        Ok(method)
    }

    fn parse_param_list(&mut self) -> Result<Vec<Param>, LangError> {
        let mut params = Vec::new();
        if self.peek_kind() == Some(&TokenKind::RParen) {
            return Ok(params);
        }
        loop {
            let (name, _) = self.expect_ident("parameter name")?;
            self.expect(TokenKind::Colon, "`:`")?;
            let ty = self.parse_type()?;
            params.push(Param { name, ty });
            if self.peek_kind() == Some(&TokenKind::Comma) {
                self.next();
            } else {
                break;
            }
        }
        Ok(params)
    }

    fn parse_type(&mut self) -> Result<Type, LangError> {
        match self.peek_kind() {
            Some(TokenKind::KwInt) => {
                self.next();
                Ok(Type::Int)
            }
            Some(TokenKind::KwBool) => {
                self.next();
                Ok(Type::Bool)
            }
            _ => Err(self.err_here("a type (`int` or `bool`)")),
        }
    }

    fn parse_block(&mut self) -> Result<Block, LangError> {
        let open = self.expect(TokenKind::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        loop {
            match self.peek_kind() {
                Some(TokenKind::RBrace) => {
                    let close = self.next().unwrap();
                    return Ok(Block {
                        stmts,
                        open_line: open.span.line,
                        close_line: close.span.line,
                    });
                }
                Some(_) => stmts.push(self.parse_stmt()?),
                None => return Err(self.err_here("`}`")),
            }
        }
    }

    fn parse_stmt(&mut self) -> Result<Stmt, LangError> {
        let tok = self.peek().cloned().ok_or_else(|| self.err_here("a statement"))?;
        let line = tok.span.line;
        let kind = match tok.kind {
            TokenKind::KwVar => {
                self.next();
                let (name, _) = self.expect_ident("variable name")?;
                let ty = if self.peek_kind() == Some(&TokenKind::Colon) {
                    self.next();
                    Some(self.parse_type()?)
                } else {
                    None
                };
                let init = if self.peek_kind() == Some(&TokenKind::Assign) {
                    self.next();
                    Some(self.parse_expr()?)
                } else {
                    None
                };
                self.expect(TokenKind::Semi, "`;`")?;
                StmtKind::VarDecl { name, ty, init }
            }
            TokenKind::Ident(_) => {
                let (target, _) = self.expect_ident("assignment target")?;
                self.expect(TokenKind::Assign, "`:=`")?;
                let rhs = self.parse_expr()?;
                self.expect(TokenKind::Semi, "`;`")?;
                StmtKind::Assign { target, rhs }
            }
            TokenKind::KwIf => {
                self.next();
                let cond = self.parse_expr()?;
                let then_block = self.parse_block()?;
                let else_block = if self.peek_kind() == Some(&TokenKind::KwElse) {
                    self.next();
                    if self.peek_kind() == Some(&TokenKind::KwIf) {
                        // `else if` chains nest as a one-statement else block.
                        let nested = self.parse_stmt()?;
                        let l = nested.line;
                        Block {
                            stmts: vec![nested],
                            open_line: l,
                            close_line: l,
                        }
                    } else {
                        self.parse_block()?
                    }
                } else {
                    Block {
                        stmts: Vec::new(),
                        open_line: line,
                        close_line: line,
                    }
                };
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                }
            }
            TokenKind::KwWhile => {
                self.next();
                let cond = self.parse_expr()?;
                let mut invariants = Vec::new();
                let mut decreases = None;
                loop {
                    match self.peek_kind() {
                        Some(TokenKind::KwInvariant) => {
                            self.next();
                            invariants.push(self.parse_expr()?);
                        }
                        Some(TokenKind::KwDecreases) => {
                            if decreases.is_some() {
                                return Err(self.err_here("a single `decreases` clause"));
                            }
                            self.next();
                            decreases = Some(self.parse_expr()?);
                        }
                        _ => break,
                    }
                }
                let body = self.parse_block()?;
                StmtKind::While {
                    cond,
                    invariants,
                    decreases,
                    body,
                }
            }
            TokenKind::KwReturn => {
                self.next();
                let mut values = Vec::new();
                if self.peek_kind() != Some(&TokenKind::Semi) {
                    loop {
                        values.push(self.parse_expr()?);
                        if self.peek_kind() == Some(&TokenKind::Comma) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::Semi, "`;`")?;
                StmtKind::Return { values }
            }
            TokenKind::LBrace => StmtKind::Block(self.parse_block()?),
            _ => return Err(self.err_here("a statement")),
        };
        Ok(Stmt {
            kind,
            line,
            marker: false,
        })
    }

    // Precedence climbing; `==>` is right-associative, the rest left.
    pub fn parse_expr(&mut self) -> Result<Expr, LangError> {
        self.parse_binary(1)
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let op_span = self.next().unwrap().span;
            let next_min = if op == BinOp::Implies { prec } else { prec + 1 };
            let rhs = self.parse_binary(next_min)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs), op_span);
        }
        Ok(lhs)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        match self.peek_kind()? {
            TokenKind::Plus => Some(BinOp::Add),
            TokenKind::Minus => Some(BinOp::Sub),
            TokenKind::Star => Some(BinOp::Mul),
            TokenKind::Slash => Some(BinOp::Div),
            TokenKind::Percent => Some(BinOp::Mod),
            TokenKind::Lt => Some(BinOp::Lt),
            TokenKind::Le => Some(BinOp::Le),
            TokenKind::Gt => Some(BinOp::Gt),
            TokenKind::Ge => Some(BinOp::Ge),
            TokenKind::EqEq => Some(BinOp::Eq),
            TokenKind::Neq => Some(BinOp::Neq),
            TokenKind::AndAnd => Some(BinOp::And),
            TokenKind::OrOr => Some(BinOp::Or),
            TokenKind::Implies => Some(BinOp::Implies),
            _ => None,
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, LangError> {
        match self.peek_kind() {
            Some(TokenKind::Minus) => {
                let span = self.next().unwrap().span;
                let inner = self.parse_unary()?;
                Ok(Expr::Unary(UnOp::Neg, Box::new(inner), span))
            }
            Some(TokenKind::Not) => {
                let span = self.next().unwrap().span;
                let inner = self.parse_unary()?;
                Ok(Expr::Unary(UnOp::Not, Box::new(inner), span))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, LangError> {
        let tok = self.peek().cloned().ok_or_else(|| self.err_here("an expression"))?;
        match tok.kind {
            TokenKind::Int(v) => {
                self.next();
                Ok(Expr::IntLit(v, tok.span))
            }
            TokenKind::KwTrue => {
                self.next();
                Ok(Expr::BoolLit(true, tok.span))
            }
            TokenKind::KwFalse => {
                self.next();
                Ok(Expr::BoolLit(false, tok.span))
            }
            TokenKind::Ident(name) => {
                self.next();
                Ok(Expr::Var(name, tok.span))
            }
            TokenKind::LParen => {
                self.next();
                let e = self.parse_expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.err_here("an expression")),
        }
    }

    fn apply_markers(&self, block: &mut Block) {
        for stmt in &mut block.stmts {
            if self.marker_lines.contains(&stmt.line) {
                stmt.marker = true;
            }
            match &mut stmt.kind {
                StmtKind::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    self.apply_markers(then_block);
                    self.apply_markers(else_block);
                }
                StmtKind::While { body, .. } => self.apply_markers(body),
                StmtKind::Block(b) => self.apply_markers(b),
                _ => {}
            }
        }
    }
}

/// Localization, patching and the marker protocol are all line-oriented, so
/// the subset requires one statement per source line.
fn enforce_one_statement_per_line(p: &Program) -> Result<(), LangError> {
    let mut seen = BTreeSet::new();
    for m in &p.methods {
        for s in m.statements() {
            if !seen.insert(s.line) {
                return Err(LangError::Syntax {
                    line: s.line,
                    col: 1,
                    expected: "one statement per line".into(),
                });
            }
        }
    }
    Ok(())
}

/// Parse a standalone expression (used by tests and tools).
pub fn parse_expr_str(text: &str) -> Result<Expr, LangError> {
    let mut parser = Parser {
        tokens: lex(text)?.tokens,
        pos: 0,
        marker_lines: BTreeSet::new(),
    };
    let e = parser.parse_expr()?;
    if parser.peek().is_some() {
        return Err(parser.err_here("end of expression"));
    }
    Ok(e)
}
