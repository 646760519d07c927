use alloc::string::String;

use super::ast::{Expr, Program, Stmt, StmtKind, UnOp};

const INDENT: &str = "    ";

/// Canonical source text for a program: functions first, then the entry
/// body. Compound sub-expressions are always parenthesized.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for f in &p.functions {
        out.push_str("fn ");
        out.push_str(&f.name);
        out.push('(');
        out.push_str(&f.params.join(", "));
        out.push_str(") ");
        block(&mut out, &f.body, 0);
        out.push_str("\n\n");
    }
    for s in &p.body {
        stmt(&mut out, s, 0);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    out.push_str("{\n");
    for s in body {
        stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    stmt_inline(out, s, depth);
    out.push('\n');
}

fn stmt_inline(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Let(n, e) => {
            out.push_str("let ");
            out.push_str(n);
            out.push_str(" = ");
            expr(out, e);
            out.push(';');
        }
        StmtKind::Assign(n, e) => {
            out.push_str(n);
            out.push_str(" = ");
            expr(out, e);
            out.push(';');
        }
        StmtKind::Repeat { count, var, body } => {
            out.push_str("repeat ");
            out.push_str(&alloc::format!("{count} "));
            if let Some(v) = var {
                out.push_str("as ");
                out.push_str(v);
                out.push(' ');
            }
            block(out, body, depth);
        }
        StmtKind::If { cond, then, otherwise } => {
            out.push_str("if ");
            expr(out, cond);
            out.push(' ');
            block(out, then, depth);
            if let Some(b) = otherwise {
                out.push_str(" else ");
                block(out, b, depth);
            }
        }
        StmtKind::Expr(e) => {
            expr(out, e);
            out.push(';');
        }
    }
}

fn is_atomic(e: &Expr) -> bool {
    match e {
        Expr::Int(n) => *n >= 0,
        Expr::Str(_) | Expr::Bool(_) | Expr::None | Expr::Var(..) | Expr::Call(_) => true,
        _ => false,
    }
}

fn sub(out: &mut String, e: &Expr) {
    if is_atomic(e) {
        expr(out, e);
    } else {
        out.push('(');
        expr(out, e);
        out.push(')');
    }
}

pub fn expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Int(n) => out.push_str(&alloc::format!("{n}")),
        Expr::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::None => out.push_str("none"),
        Expr::Var(n, _) => out.push_str(n),
        Expr::Unary(op, a) => {
            out.push_str(match op {
                UnOp::Not => "not ",
                UnOp::Neg => "-",
            });
            if *op == UnOp::Neg {
                // keep `-(5)` distinct from the literal `-5`
                out.push('(');
                expr(out, a);
                out.push(')');
            } else {
                sub(out, a);
            }
        }
        Expr::Binary(op, a, b) => {
            sub(out, a);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            sub(out, b);
        }
        Expr::Call(c) => {
            out.push_str(&c.name);
            out.push('(');
            for (i, a) in c.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(out, a);
            }
            out.push(')');
        }
    }
}
