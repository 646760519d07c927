use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// 1-based source location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }
}

impl core::fmt::Display for Span {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Str(String),
    Bool(bool),
    None,
    Var(String, Span),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub name: String,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let(String, Expr),
    Assign(String, Expr),
    Repeat {
        count: u32,
        var: Option<String>,
        body: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then: Vec<Stmt>,
        otherwise: Option<Vec<Stmt>>,
    },
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

/// Top-level function definitions plus the entry body.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub functions: Vec<FnDef>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FnDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// The same program with every source location zeroed, for structural
    /// comparison.
    pub fn without_spans(&self) -> Program {
        Program {
            functions: self
                .functions
                .iter()
                .map(|f| FnDef {
                    name: f.name.clone(),
                    params: f.params.clone(),
                    body: strip_block(&f.body),
                    span: Span::default(),
                })
                .collect(),
            body: strip_block(&self.body),
        }
    }

    /// Adds library functions not already defined here. Later entries of
    /// `library` win over earlier ones with the same name.
    pub fn link<'a>(&self, library: impl IntoIterator<Item = &'a FnDef>) -> Program {
        let mut out = self.clone();
        let mut imported: Vec<FnDef> = Vec::new();
        for f in library {
            if self.function(&f.name).is_some() {
                continue;
            }
            if let Some(slot) = imported.iter_mut().find(|g| g.name == f.name) {
                *slot = f.clone();
            } else {
                imported.push(f.clone());
            }
        }
        imported.append(&mut out.functions);
        out.functions = imported;
        out
    }
}

fn strip_block(b: &[Stmt]) -> Vec<Stmt> {
    b.iter().map(strip_stmt).collect()
}

fn strip_stmt(s: &Stmt) -> Stmt {
    let kind = match &s.kind {
        StmtKind::Let(n, e) => StmtKind::Let(n.clone(), strip_expr(e)),
        StmtKind::Assign(n, e) => StmtKind::Assign(n.clone(), strip_expr(e)),
        StmtKind::Repeat { count, var, body } => StmtKind::Repeat {
            count: *count,
            var: var.clone(),
            body: strip_block(body),
        },
        StmtKind::If { cond, then, otherwise } => StmtKind::If {
            cond: strip_expr(cond),
            then: strip_block(then),
            otherwise: otherwise.as_ref().map(|b| strip_block(b)),
        },
        StmtKind::Expr(e) => StmtKind::Expr(strip_expr(e)),
    };
    Stmt {
        kind,
        span: Span::default(),
    }
}

fn strip_expr(e: &Expr) -> Expr {
    match e {
        Expr::Var(n, _) => Expr::Var(n.clone(), Span::default()),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(strip_expr(a))),
        Expr::Binary(op, a, b) => Expr::Binary(*op, Box::new(strip_expr(a)), Box::new(strip_expr(b))),
        Expr::Call(c) => Expr::Call(Call {
            name: c.name.clone(),
            args: c.args.iter().map(strip_expr).collect(),
            span: Span::default(),
        }),
        other => other.clone(),
    }
}
