//! Bounded brute-force entailment checking.
//!
//! Enumerates every assignment of integers in `[-bound, bound]` (booleans
//! over both values) to the entailment's free symbols and evaluates
//! `hypothesis ==> conclusion` with exact integer semantics. Division is
//! Euclidean (non-negative remainder), matching SMT-LIB's `div`/`mod`.
//! Any division by zero while evaluating a tuple falsifies that tuple's
//! hypothesis, i.e. the tuple is skipped.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::hoare::Entailment;
use crate::lang::{BinOp, Expr, Type, UnOp};

use super::{EntailError, Status, Verdict};

pub const MAX_SYMBOLS: usize = 6;
pub const MAX_BOUND: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i128),
    Bool(bool),
}

/// Division by zero aborts the evaluation of the whole tuple.
pub struct DivByZero;

pub fn eval_expr(e: &Expr, env: &BTreeMap<String, Value>) -> Result<Value, DivByZero> {
    match e {
        Expr::IntLit(v, _) => Ok(Value::Int(*v as i128)),
        Expr::BoolLit(b, _) => Ok(Value::Bool(*b)),
        Expr::Var(name, _) => Ok(*env
            .get(name)
            .unwrap_or_else(|| panic!("unbound symbol `{name}` in evaluator"))),
        Expr::Unary(op, inner, _) => {
            let v = eval_expr(inner, env)?;
            match (op, v) {
                (UnOp::Neg, Value::Int(i)) => Ok(Value::Int(-i)),
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                _ => panic!("ill-typed unary expression reached evaluator"),
            }
        }
        Expr::Binary(op, lhs, rhs, _) => {
            // Short-circuit so that guarded divisions (b != 0 && a / b > 0)
            // do not spuriously hit the divisor-zero path.
            if *op == BinOp::And {
                return match eval_expr(lhs, env)? {
                    Value::Bool(false) => Ok(Value::Bool(false)),
                    Value::Bool(true) => eval_expr(rhs, env),
                    _ => panic!("ill-typed && reached evaluator"),
                };
            }
            if *op == BinOp::Or {
                return match eval_expr(lhs, env)? {
                    Value::Bool(true) => Ok(Value::Bool(true)),
                    Value::Bool(false) => eval_expr(rhs, env),
                    _ => panic!("ill-typed || reached evaluator"),
                };
            }
            if *op == BinOp::Implies {
                return match eval_expr(lhs, env)? {
                    Value::Bool(false) => Ok(Value::Bool(true)),
                    Value::Bool(true) => eval_expr(rhs, env),
                    _ => panic!("ill-typed ==> reached evaluator"),
                };
            }
            let l = eval_expr(lhs, env)?;
            let r = eval_expr(rhs, env)?;
            match (l, r) {
                (Value::Int(a), Value::Int(b)) => match op {
                    BinOp::Add => Ok(Value::Int(a + b)),
                    BinOp::Sub => Ok(Value::Int(a - b)),
                    BinOp::Mul => Ok(Value::Int(a * b)),
                    BinOp::Div => {
                        if b == 0 {
                            Err(DivByZero)
                        } else {
                            Ok(Value::Int(a.div_euclid(b)))
                        }
                    }
                    BinOp::Mod => {
                        if b == 0 {
                            Err(DivByZero)
                        } else {
                            Ok(Value::Int(a.rem_euclid(b)))
                        }
                    }
                    BinOp::Lt => Ok(Value::Bool(a < b)),
                    BinOp::Le => Ok(Value::Bool(a <= b)),
                    BinOp::Gt => Ok(Value::Bool(a > b)),
                    BinOp::Ge => Ok(Value::Bool(a >= b)),
                    BinOp::Eq => Ok(Value::Bool(a == b)),
                    BinOp::Neq => Ok(Value::Bool(a != b)),
                    _ => panic!("ill-typed int operation reached evaluator"),
                },
                (Value::Bool(a), Value::Bool(b)) => match op {
                    BinOp::Eq => Ok(Value::Bool(a == b)),
                    BinOp::Neq => Ok(Value::Bool(a != b)),
                    _ => panic!("ill-typed bool operation reached evaluator"),
                },
                _ => panic!("mixed-type binary expression reached evaluator"),
            }
        }
    }
}

fn eval_formula(e: &Expr, env: &BTreeMap<String, Value>) -> Result<bool, DivByZero> {
    match eval_expr(e, env)? {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => panic!("formula evaluated to int"),
    }
}

/// Returns true when the tuple satisfies every hypothesis formula and
/// falsifies the conclusion. Division by zero anywhere skips the tuple.
fn falsifies(e: &Entailment, env: &BTreeMap<String, Value>) -> bool {
    let run = || -> Result<bool, DivByZero> {
        for cond in &e.hypothesis {
            if !eval_formula(&cond.formula, env)? {
                return Ok(false);
            }
        }
        Ok(!eval_formula(&e.conclusion, env)?)
    };
    run().unwrap_or(false)
}

/// Expression with variables resolved to tuple indices; the enumeration's
/// hot loop never touches names.
enum Compiled {
    Int(i128),
    Bool(bool),
    Var(usize),
    Unary(UnOp, Box<Compiled>),
    Binary(BinOp, Box<Compiled>, Box<Compiled>),
}

fn compile(e: &Expr, index: &BTreeMap<&str, usize>) -> Compiled {
    match e {
        Expr::IntLit(v, _) => Compiled::Int(*v as i128),
        Expr::BoolLit(b, _) => Compiled::Bool(*b),
        Expr::Var(name, _) => Compiled::Var(
            *index
                .get(name.as_str())
                .unwrap_or_else(|| panic!("unbound symbol `{name}` in evaluator")),
        ),
        Expr::Unary(op, inner, _) => Compiled::Unary(*op, Box::new(compile(inner, index))),
        Expr::Binary(op, lhs, rhs, _) => Compiled::Binary(
            *op,
            Box::new(compile(lhs, index)),
            Box::new(compile(rhs, index)),
        ),
    }
}

fn eval_compiled(c: &Compiled, env: &[Value]) -> Result<Value, DivByZero> {
    match c {
        Compiled::Int(v) => Ok(Value::Int(*v)),
        Compiled::Bool(b) => Ok(Value::Bool(*b)),
        Compiled::Var(i) => Ok(env[*i]),
        Compiled::Unary(op, inner) => {
            let v = eval_compiled(inner, env)?;
            match (op, v) {
                (UnOp::Neg, Value::Int(i)) => Ok(Value::Int(-i)),
                (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                _ => panic!("ill-typed unary expression reached evaluator"),
            }
        }
        Compiled::Binary(op, lhs, rhs) => {
            match op {
                BinOp::And => {
                    return match eval_compiled(lhs, env)? {
                        Value::Bool(false) => Ok(Value::Bool(false)),
                        Value::Bool(true) => eval_compiled(rhs, env),
                        _ => panic!("ill-typed && reached evaluator"),
                    }
                }
                BinOp::Or => {
                    return match eval_compiled(lhs, env)? {
                        Value::Bool(true) => Ok(Value::Bool(true)),
                        Value::Bool(false) => eval_compiled(rhs, env),
                        _ => panic!("ill-typed || reached evaluator"),
                    }
                }
                BinOp::Implies => {
                    return match eval_compiled(lhs, env)? {
                        Value::Bool(false) => Ok(Value::Bool(true)),
                        Value::Bool(true) => eval_compiled(rhs, env),
                        _ => panic!("ill-typed ==> reached evaluator"),
                    }
                }
                _ => {}
            }
            let l = eval_compiled(lhs, env)?;
            let r = eval_compiled(rhs, env)?;
            match (l, r) {
                (Value::Int(a), Value::Int(b)) => match op {
                    BinOp::Add => Ok(Value::Int(a + b)),
                    BinOp::Sub => Ok(Value::Int(a - b)),
                    BinOp::Mul => Ok(Value::Int(a * b)),
                    BinOp::Div if b == 0 => Err(DivByZero),
                    BinOp::Div => Ok(Value::Int(a.div_euclid(b))),
                    BinOp::Mod if b == 0 => Err(DivByZero),
                    BinOp::Mod => Ok(Value::Int(a.rem_euclid(b))),
                    BinOp::Lt => Ok(Value::Bool(a < b)),
                    BinOp::Le => Ok(Value::Bool(a <= b)),
                    BinOp::Gt => Ok(Value::Bool(a > b)),
                    BinOp::Ge => Ok(Value::Bool(a >= b)),
                    BinOp::Eq => Ok(Value::Bool(a == b)),
                    BinOp::Neq => Ok(Value::Bool(a != b)),
                    _ => panic!("ill-typed int operation reached evaluator"),
                },
                (Value::Bool(a), Value::Bool(b)) => match op {
                    BinOp::Eq => Ok(Value::Bool(a == b)),
                    BinOp::Neq => Ok(Value::Bool(a != b)),
                    _ => panic!("ill-typed bool operation reached evaluator"),
                },
                _ => panic!("mixed-type binary expression reached evaluator"),
            }
        }
    }
}

pub fn check_bruteforce(e: &Entailment, bound: i64) -> Result<Verdict, EntailError> {
    if !(1..=MAX_BOUND).contains(&bound) {
        return Err(EntailError::BoundTooLarge {
            bound,
            max: MAX_BOUND,
        });
    }
    if e.symbols.len() > MAX_SYMBOLS {
        return Err(EntailError::TooManySymbols {
            count: e.symbols.len(),
            max: MAX_SYMBOLS,
        });
    }
    let start = Instant::now();
    let index: BTreeMap<&str, usize> = e
        .symbols
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.as_str(), i))
        .collect();
    let hypothesis: Vec<Compiled> = e
        .hypothesis
        .iter()
        .map(|c| compile(&c.formula, &index))
        .collect();
    let conclusion = compile(&e.conclusion, &index);
    let falsifies = |env: &[Value]| -> bool {
        let run = || -> Result<bool, DivByZero> {
            for h in &hypothesis {
                match eval_compiled(h, env)? {
                    Value::Bool(true) => {}
                    Value::Bool(false) => return Ok(false),
                    Value::Int(_) => panic!("formula evaluated to int"),
                }
            }
            match eval_compiled(&conclusion, env)? {
                Value::Bool(b) => Ok(!b),
                Value::Int(_) => panic!("formula evaluated to int"),
            }
        };
        run().unwrap_or(false)
    };

    let ranges: Vec<(i64, i64)> = e
        .symbols
        .iter()
        .map(|(_, ty)| match ty {
            Type::Int => (-bound, bound),
            Type::Bool => (0, 1),
        })
        .collect();
    let mut tuple: Vec<i64> = ranges.iter().map(|(lo, _)| *lo).collect();
    let mut env: Vec<Value> = Vec::with_capacity(tuple.len());
    loop {
        env.clear();
        for ((_, ty), raw) in e.symbols.iter().zip(&tuple) {
            env.push(match ty {
                Type::Int => Value::Int(*raw as i128),
                Type::Bool => Value::Bool(*raw != 0),
            });
        }
        if falsifies(&env) {
            let cex: BTreeMap<String, i64> = e
                .symbols
                .iter()
                .zip(&tuple)
                .map(|((name, _), v)| (name.clone(), *v))
                .collect();
            return Ok(Verdict {
                status: Status::Invalid,
                counterexample: Some(cex),
                elapsed_ms: start.elapsed().as_millis() as u64,
            });
        }
        // Odometer, rightmost symbol fastest.
        let mut i = tuple.len();
        loop {
            if i == 0 {
                return Ok(Verdict {
                    status: Status::Valid,
                    counterexample: None,
                    elapsed_ms: start.elapsed().as_millis() as u64,
                });
            }
            i -= 1;
            if tuple[i] < ranges[i].1 {
                tuple[i] += 1;
                break;
            }
            tuple[i] = ranges[i].0;
        }
    }
}

/// Independent confirmation that a counterexample does what a counterexample
/// must: satisfy the hypothesis and violate the conclusion.
pub fn confirm_counterexample(e: &Entailment, cex: &BTreeMap<String, i64>) -> bool {
    let env: BTreeMap<String, Value> = e
        .symbols
        .iter()
        .map(|(name, ty)| {
            let raw = cex.get(name).copied().unwrap_or(0);
            let value = match ty {
                Type::Int => Value::Int(raw as i128),
                Type::Bool => Value::Bool(raw != 0),
            };
            (name.clone(), value)
        })
        .collect();
    falsifies(e, &env)
}
