//! Type checking and definite-assignment analysis.
//!
//! The subset is deliberately strict: every identifier must be declared,
//! arithmetic is on `int` only, logic on `bool` only, locals may not shadow
//! or redeclare any other name in the method, and a variable may not be read
//! before it has definitely been assigned. In-parameters are read-only.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::LangError;

pub fn typecheck(program: &mut Program) -> Result<(), LangError> {
    for m in &mut program.methods {
        check_method(m)?;
    }
    Ok(())
}

fn check_method(m: &mut Method) -> Result<(), LangError> {
    let mut table: BTreeMap<String, Type> = BTreeMap::new();
    for p in m.params.iter().chain(m.returns.iter()) {
        if table.insert(p.name.clone(), p.ty).is_some() {
            return Err(LangError::Type {
                line: m.start_line,
                message: format!("duplicate parameter or return name `{}`", p.name),
            });
        }
    }

    // Contracts: requires sees params only; ensures sees params and returns.
    let param_table: BTreeMap<String, Type> = m
        .params
        .iter()
        .map(|p| (p.name.clone(), p.ty))
        .collect();
    for r in &m.requires {
        expect_type(r, Type::Bool, &param_table, "requires clause")?;
    }
    for e in &m.ensures {
        expect_type(e, Type::Bool, &table, "ensures clause")?;
    }

    // Collect local declarations into the flat table, then check the body.
    collect_locals(&m.body, &mut table, &m.params, &m.returns)?;

    let params: BTreeSet<String> = m.params.iter().map(|p| p.name.clone()).collect();
    let mut assigned: BTreeSet<String> = params.clone();
    check_block(&m.body, &table, &params, &mut assigned)?;

    m.symbol_table = table;
    Ok(())
}

fn collect_locals(
    block: &Block,
    table: &mut BTreeMap<String, Type>,
    params: &[Param],
    returns: &[Param],
) -> Result<(), LangError> {
    for stmt in &block.stmts {
        match &stmt.kind {
            StmtKind::VarDecl { name, ty, init } => {
                if table.contains_key(name) {
                    return Err(LangError::Type {
                        line: stmt.line,
                        message: format!(
                            "`{name}` is already declared; the subset has no shadowing"
                        ),
                    });
                }
                let resolved = match (ty, init) {
                    (Some(t), _) => *t,
                    (None, Some(e)) => infer_type(e, table)?,
                    (None, None) => {
                        return Err(LangError::Type {
                            line: stmt.line,
                            message: format!(
                                "`var {name};` needs a type annotation or an initializer"
                            ),
                        })
                    }
                };
                table.insert(name.clone(), resolved);
            }
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                collect_locals(then_block, table, params, returns)?;
                collect_locals(else_block, table, params, returns)?;
            }
            StmtKind::While { body, .. } => collect_locals(body, table, params, returns)?,
            StmtKind::Block(b) => collect_locals(b, table, params, returns)?,
            _ => {}
        }
    }
    Ok(())
}

fn check_block(
    block: &Block,
    table: &BTreeMap<String, Type>,
    params: &BTreeSet<String>,
    assigned: &mut BTreeSet<String>,
) -> Result<(), LangError> {
    for stmt in &block.stmts {
        check_stmt(stmt, table, params, assigned)?;
    }
    Ok(())
}

fn check_stmt(
    stmt: &Stmt,
    table: &BTreeMap<String, Type>,
    params: &BTreeSet<String>,
    assigned: &mut BTreeSet<String>,
) -> Result<(), LangError> {
    match &stmt.kind {
        StmtKind::VarDecl { name, ty, init } => {
            if let Some(e) = init {
                check_reads(e, assigned, stmt.line)?;
                let actual = infer_type(e, table)?;
                let declared = table[name];
                if ty.is_some() && actual != declared {
                    return Err(LangError::Type {
                        line: stmt.line,
                        message: format!(
                            "initializer of `{name}` has type {actual}, expected {declared}"
                        ),
                    });
                }
                assigned.insert(name.clone());
            }
        }
        StmtKind::Assign { target, rhs } => {
            let Some(&target_ty) = table.get(target) else {
                return Err(LangError::Type {
                    line: stmt.line,
                    message: format!("undeclared variable `{target}`"),
                });
            };
            if params.contains(target) {
                return Err(LangError::Type {
                    line: stmt.line,
                    message: format!("`{target}` is an in-parameter and cannot be assigned"),
                });
            }
            check_reads(rhs, assigned, stmt.line)?;
            let actual = infer_type(rhs, table)?;
            if actual != target_ty {
                return Err(LangError::Type {
                    line: stmt.line,
                    message: format!(
                        "cannot assign {actual} value to `{target}` of type {target_ty}"
                    ),
                });
            }
            assigned.insert(target.clone());
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            check_reads(cond, assigned, stmt.line)?;
            expect_type_at(cond, Type::Bool, table, "if condition", stmt.line)?;
            let mut then_assigned = assigned.clone();
            let mut else_assigned = assigned.clone();
            check_block(then_block, table, params, &mut then_assigned)?;
            check_block(else_block, table, params, &mut else_assigned)?;
            // A variable is definitely assigned after the if only when both
            // branches assign it.
            *assigned = then_assigned
                .intersection(&else_assigned)
                .cloned()
                .collect();
        }
        StmtKind::While {
            cond,
            invariants,
            decreases,
            body,
        } => {
            check_reads(cond, assigned, stmt.line)?;
            expect_type_at(cond, Type::Bool, table, "while condition", stmt.line)?;
            for inv in invariants {
                check_reads(inv, assigned, stmt.line)?;
                expect_type_at(inv, Type::Bool, table, "loop invariant", stmt.line)?;
            }
            if let Some(d) = decreases {
                check_reads(d, assigned, stmt.line)?;
                expect_type_at(d, Type::Int, table, "decreases clause", stmt.line)?;
            }
            // The body may run zero times, so its assignments don't count.
            let mut body_assigned = assigned.clone();
            check_block(body, table, params, &mut body_assigned)?;
        }
        StmtKind::Return { values } => {
            // Arity and types against the declared out-values are checked in
            // `check_returns` once the whole table is known.
            for v in values {
                check_reads(v, assigned, stmt.line)?;
            }
        }
        StmtKind::Block(b) => check_block(b, table, params, assigned)?,
    }
    Ok(())
}

fn check_reads(e: &Expr, assigned: &BTreeSet<String>, line: u32) -> Result<(), LangError> {
    for v in e.free_vars() {
        if !assigned.contains(&v) {
            return Err(LangError::Type {
                line,
                message: format!("`{v}` may be read before it is assigned"),
            });
        }
    }
    Ok(())
}

fn expect_type(
    e: &Expr,
    expected: Type,
    table: &BTreeMap<String, Type>,
    what: &str,
) -> Result<(), LangError> {
    expect_type_at(e, expected, table, what, e.span().line)
}

fn expect_type_at(
    e: &Expr,
    expected: Type,
    table: &BTreeMap<String, Type>,
    what: &str,
    line: u32,
) -> Result<(), LangError> {
    let actual = infer_type(e, table)?;
    if actual != expected {
        return Err(LangError::Type {
            line,
            message: format!("{what} has type {actual}, expected {expected}"),
        });
    }
    Ok(())
}

pub fn infer_type(e: &Expr, table: &BTreeMap<String, Type>) -> Result<Type, LangError> {
    match e {
        Expr::IntLit(..) => Ok(Type::Int),
        Expr::BoolLit(..) => Ok(Type::Bool),
        Expr::Var(name, span) => table.get(name).copied().ok_or_else(|| LangError::Type {
            line: span.line,
            message: format!("undeclared variable `{name}`"),
        }),
        Expr::Unary(op, inner, span) => {
            let inner_ty = infer_type(inner, table)?;
            let (want, result) = match op {
                UnOp::Neg => (Type::Int, Type::Int),
                UnOp::Not => (Type::Bool, Type::Bool),
            };
            if inner_ty != want {
                return Err(LangError::Type {
                    line: span.line,
                    message: format!("unary operand has type {inner_ty}, expected {want}"),
                });
            }
            Ok(result)
        }
        Expr::Binary(op, lhs, rhs, span) => {
            let lt = infer_type(lhs, table)?;
            let rt = infer_type(rhs, table)?;
            let fail = |msg: String| LangError::Type {
                line: span.line,
                message: msg,
            };
            if op.is_arithmetic() {
                if lt != Type::Int || rt != Type::Int {
                    return Err(fail(format!(
                        "`{}` expects int operands, got {lt} and {rt}",
                        op.symbol()
                    )));
                }
                Ok(Type::Int)
            } else if *op == BinOp::Eq || *op == BinOp::Neq {
                if lt != rt {
                    return Err(fail(format!(
                        "`{}` compares mismatched types {lt} and {rt}",
                        op.symbol()
                    )));
                }
                Ok(Type::Bool)
            } else if op.is_comparison() {
                if lt != Type::Int || rt != Type::Int {
                    return Err(fail(format!(
                        "`{}` expects int operands, got {lt} and {rt}",
                        op.symbol()
                    )));
                }
                Ok(Type::Bool)
            } else {
                if lt != Type::Bool || rt != Type::Bool {
                    return Err(fail(format!(
                        "`{}` expects bool operands, got {lt} and {rt}",
                        op.symbol()
                    )));
                }
                Ok(Type::Bool)
            }
        }
    }
}

/// Validate return arity/types against the declared out-values.
pub fn check_returns(program: &Program) -> Result<(), LangError> {
    for m in &program.methods {
        for s in m.statements() {
            if let StmtKind::Return { values } = &s.kind {
                if values.is_empty() {
                    continue;
                }
                if values.len() != m.returns.len() {
                    return Err(LangError::Type {
                        line: s.line,
                        message: format!(
                            "return has {} value(s); method declares {} out-value(s)",
                            values.len(),
                            m.returns.len()
                        ),
                    });
                }
                for (v, ret) in values.iter().zip(&m.returns) {
                    let actual = infer_type(v, &m.symbol_table)?;
                    if actual != ret.ty {
                        return Err(LangError::Type {
                            line: s.line,
                            message: format!(
                                "return value for `{}` has type {actual}, expected {}",
                                ret.name, ret.ty
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
