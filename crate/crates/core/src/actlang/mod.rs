//! The sandboxed action language the action agent writes.
//!
//! Programs are statement lists with top-level `fn` definitions, bounded
//! `repeat` loops and `if`/`else`. Static checks reject recursion and
//! undefined names, and every executed statement costs a step, so every
//! checked program halts within [`ExecLimits::max_steps`].
//! The grammar is published in `docs/grammar.ebnf`.

mod ast;
mod check;
mod extract;
mod interp;
mod lexer;
mod parser;
pub mod path;
mod pretty;

use alloc::string::String;

pub use ast::{BinOp, Call, Expr, FnDef, Program, Span, Stmt, StmtKind, UnOp};
pub use check::check;
pub use extract::{extract_code, NoCodeFound};
pub use interp::{execute, ExecLimits, ExecResult, ExecStatus, Value, EXPLORE_SIGHT, MINE_CANDIDATES};
pub use lexer::KEYWORDS;
pub use parser::parse;
pub use pretty::pretty;

/// Largest literal `repeat` count.
pub const MAX_REPEAT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("check error at {span}: {message}")]
pub struct CheckError {
    pub span: Span,
    pub message: String,
}

impl CheckError {
    pub fn new(span: Span, message: String) -> CheckError {
        CheckError { span, message }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Built-in functions and primitives with their arities.
pub const BUILTINS: &[(&str, usize)] = &[
    // pure queries
    ("pos", 3),
    ("rel", 3),
    ("ground", 2),
    ("has", 2),
    ("count", 1),
    ("block_at", 1),
    ("found", 1),
    ("nearest", 1),
    // actions
    ("mine", 2),
    ("dig", 1),
    ("place", 2),
    ("craft", 2),
    ("smelt", 3),
    ("equip", 1),
    ("move_to", 1),
    ("look_at", 1),
    ("explore", 4),
    ("pillar_up", 1),
    ("use_item", 2),
    ("chat", 1),
];

pub fn builtin_arity(name: &str) -> Option<usize> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// Parses and checks `src`.
pub fn compile(src: &str) -> Result<Program, CompileError> {
    let p = parse(src)?;
    check(&p)?;
    Ok(p)
}

/// Reference card for the language, shown to the action agent alongside
/// retrieved skills.
pub const LANGUAGE_GUIDE: &str = include_str!("guide.txt");
