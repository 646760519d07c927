use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Expr, Program, Span, Stmt, StmtKind};
use super::lexer::KEYWORDS;
use super::{builtin_arity, CheckError};

/// Static checks: known callees with the right arity, variables defined
/// before use, unique function names and an acyclic call graph.
pub fn check(p: &Program) -> Result<(), CheckError> {
    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &p.functions {
        if builtin_arity(&f.name).is_some() {
            return Err(CheckError::new(
                f.span,
                format!("function `{}` shadows a built-in", f.name),
            ));
        }
        if names.insert(&f.name, f.params.len()).is_some() {
            return Err(CheckError::new(
                f.span,
                format!("function `{}` is defined twice", f.name),
            ));
        }
        let mut seen = BTreeSet::new();
        for param in &f.params {
            if !seen.insert(param.as_str()) {
                return Err(CheckError::new(
                    f.span,
                    format!("parameter `{param}` is repeated in `{}`", f.name),
                ));
            }
        }
    }

    let mut graph: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for f in &p.functions {
        let mut scope = Scope::new(f.params.iter().cloned().collect());
        let mut calls = BTreeSet::new();
        block(&f.body, &names, &mut scope, &mut calls)?;
        graph.insert(&f.name, calls);
    }
    let mut scope = Scope::new(Vec::new());
    let mut calls = BTreeSet::new();
    block(&p.body, &names, &mut scope, &mut calls)?;

    // cycle detection by colored DFS in definition order
    let mut color: BTreeMap<&str, u8> = BTreeMap::new();
    for f in &p.functions {
        let mut stack = Vec::new();
        if let Some(cycle) = dfs(&f.name, &graph, &mut color, &mut stack) {
            return Err(CheckError::new(
                f.span,
                format!("recursion is not allowed: {}", cycle.join(" -> ")),
            ));
        }
    }
    Ok(())
}

fn dfs<'a>(
    n: &'a str,
    graph: &'a BTreeMap<&'a str, BTreeSet<String>>,
    color: &mut BTreeMap<&'a str, u8>,
    stack: &mut Vec<&'a str>,
) -> Option<Vec<String>> {
    match color.get(n) {
        Some(2) => return None,
        Some(1) => {
            let start = stack.iter().position(|s| *s == n).unwrap_or(0);
            let mut cyc: Vec<String> = stack[start..].iter().map(|s| String::from(*s)).collect();
            cyc.push(String::from(n));
            return Some(cyc);
        }
        _ => {}
    }
    color.insert(n, 1);
    stack.push(n);
    if let Some(callees) = graph.get(n) {
        for c in callees {
            if let Some((k, _)) = graph.get_key_value(c.as_str()) {
                if let Some(cyc) = dfs(k, graph, color, stack) {
                    return Some(cyc);
                }
            }
        }
    }
    stack.pop();
    color.insert(n, 2);
    None
}

struct Scope {
    frames: Vec<Vec<String>>,
}

impl Scope {
    fn new(params: Vec<String>) -> Scope {
        Scope {
            frames: alloc::vec![params],
        }
    }

    fn defined(&self, n: &str) -> bool {
        self.frames.iter().any(|f| f.iter().any(|v| v == n))
    }

    fn define(&mut self, n: &str) {
        self.frames.last_mut().expect("scope").push(String::from(n));
    }
}

fn block(
    body: &[Stmt],
    fns: &BTreeMap<&str, usize>,
    scope: &mut Scope,
    calls: &mut BTreeSet<String>,
) -> Result<(), CheckError> {
    scope.frames.push(Vec::new());
    for s in body {
        stmt(s, fns, scope, calls)?;
    }
    scope.frames.pop();
    Ok(())
}

fn check_name(n: &str, span: Span) -> Result<(), CheckError> {
    if KEYWORDS.contains(&n) {
        return Err(CheckError::new(span, format!("`{n}` is a keyword")));
    }
    Ok(())
}

fn stmt(
    s: &Stmt,
    fns: &BTreeMap<&str, usize>,
    scope: &mut Scope,
    calls: &mut BTreeSet<String>,
) -> Result<(), CheckError> {
    match &s.kind {
        StmtKind::Let(n, e) => {
            check_name(n, s.span)?;
            expr(e, fns, scope, calls, s.span)?;
            scope.define(n);
        }
        StmtKind::Assign(n, e) => {
            expr(e, fns, scope, calls, s.span)?;
            if !scope.defined(n) {
                return Err(CheckError::new(
                    s.span,
                    format!("assignment to undefined variable `{n}`"),
                ));
            }
        }
        StmtKind::Repeat { var, body, .. } => {
            scope.frames.push(Vec::new());
            if let Some(v) = var {
                check_name(v, s.span)?;
                scope.define(v);
            }
            let r = block(body, fns, scope, calls);
            scope.frames.pop();
            r?;
        }
        StmtKind::If { cond, then, otherwise } => {
            expr(cond, fns, scope, calls, s.span)?;
            block(then, fns, scope, calls)?;
            if let Some(b) = otherwise {
                block(b, fns, scope, calls)?;
            }
        }
        StmtKind::Expr(e) => expr(e, fns, scope, calls, s.span)?,
    }
    Ok(())
}

fn expr(
    e: &Expr,
    fns: &BTreeMap<&str, usize>,
    scope: &Scope,
    calls: &mut BTreeSet<String>,
    at: Span,
) -> Result<(), CheckError> {
    match e {
        Expr::Var(n, span) => {
            if !scope.defined(n) {
                let span = if *span == Span::default() { at } else { *span };
                return Err(CheckError::new(span, format!("undefined variable `{n}`")));
            }
        }
        Expr::Unary(_, a) => expr(a, fns, scope, calls, at)?,
        Expr::Binary(_, a, b) => {
            expr(a, fns, scope, calls, at)?;
            expr(b, fns, scope, calls, at)?;
        }
        Expr::Call(c) => {
            let arity = match builtin_arity(&c.name) {
                Some(n) => n,
                None => match fns.get(c.name.as_str()) {
                    Some(n) => {
                        calls.insert(c.name.clone());
                        *n
                    }
                    None => return Err(CheckError::new(c.span, format!("unknown function `{}`", c.name))),
                },
            };
            if c.args.len() != arity {
                return Err(CheckError::new(
                    c.span,
                    format!(
                        "`{}` takes {arity} argument{}, got {}",
                        c.name,
                        if arity == 1 { "" } else { "s" },
                        c.args.len()
                    ),
                ));
            }
            for a in &c.args {
                expr(a, fns, scope, calls, at)?;
            }
        }
        Expr::Int(_) | Expr::Str(_) | Expr::Bool(_) | Expr::None => {}
    }
    Ok(())
}
