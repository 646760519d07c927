use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BinOp, Call, Expr, FnDef, Program, Span, Stmt, StmtKind, UnOp};
use super::lexer::{tokenize, Tok};
use super::{ParseError, MAX_REPEAT};

/// Parses a program. Function definitions and entry statements may be
/// interleaved; the entry body keeps source order.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, i: 0 };
    let mut prog = Program::default();
    while !p.at(&Tok::Eof) {
        if p.at(&Tok::Fn) {
            prog.functions.push(p.fn_def()?);
        } else {
            prog.body.push(p.stmt()?);
        }
    }
    Ok(prog)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn span(&self) -> Span {
        self.toks[self.i].1
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, msg: String) -> ParseError {
        let s = self.span();
        ParseError {
            line: s.line,
            col: s.col,
            message: msg,
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Span, ParseError> {
        if self.at(&t) {
            Ok(self.next().1)
        } else {
            Err(self.error(format!("expected {what}, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.next().1;
                Ok((s, sp))
            }
            other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn fn_def(&mut self) -> Result<FnDef, ParseError> {
        let span = self.expect(Tok::Fn, "`fn`")?;
        let (name, _) = self.ident("function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                params.push(self.ident("parameter name")?.0);
                if self.at(&Tok::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(FnDef {
            name,
            params,
            body,
            span,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        while !self.at(&Tok::RBrace) {
            if self.at(&Tok::Eof) {
                return Err(self.error("expected `}`, found end of input".into()));
            }
            if self.at(&Tok::Fn) {
                return Err(self.error("functions may only be defined at top level".into()));
            }
            out.push(self.stmt()?);
        }
        self.next();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Let => {
                self.next();
                let (name, _) = self.ident("variable name")?;
                self.expect(Tok::Assign, "`=`")?;
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Let(name, e)
            }
            Tok::Repeat => {
                self.next();
                let count = match self.peek().clone() {
                    Tok::Int(n) => {
                        self.next();
                        if !(0..=MAX_REPEAT as i64).contains(&n) {
                            return Err(ParseError {
                                line: span.line,
                                col: span.col,
                                message: format!("repeat count must be between 0 and {MAX_REPEAT}"),
                            });
                        }
                        n as u32
                    }
                    other => {
                        return Err(self.error(format!(
                            "repeat count must be an integer literal, found {}",
                            other.describe()
                        )))
                    }
                };
                let var = if self.at(&Tok::As) {
                    self.next();
                    Some(self.ident("loop variable")?.0)
                } else {
                    None
                };
                let body = self.block()?;
                StmtKind::Repeat { count, var, body }
            }
            Tok::If => return self.if_stmt(),
            Tok::Ident(name) if self.toks.get(self.i + 1).map(|t| &t.0) == Some(&Tok::Assign) => {
                self.next();
                self.next();
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Assign(name, e)
            }
            _ => {
                let e = self.expr()?;
                if !matches!(e, Expr::Call(_)) {
                    return Err(ParseError {
                        line: span.line,
                        col: span.col,
                        message: "only calls may be used as statements".into(),
                    });
                }
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { kind, span })
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.expect(Tok::If, "`if`")?;
        let cond = self.expr()?;
        let then = self.block()?;
        let otherwise = if self.at(&Tok::Else) {
            self.next();
            if self.at(&Tok::If) {
                Some(alloc::vec![self.if_stmt()?])
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt {
            kind: StmtKind::If { cond, then, otherwise },
            span,
        })
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.at(&Tok::Or) {
            self.next();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.not_expr()?;
        while self.at(&Tok::And) {
            self.next();
            let rhs = self.not_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.at(&Tok::Not) {
            self.next();
            let e = self.not_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.sum()?;
        if matches!(self.peek(), Tok::EqEq | Tok::Ne | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) {
            return Err(self.error("comparisons cannot be chained; use parentheses".into()));
        }
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.at(&Tok::Star) {
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at(&Tok::Minus) {
            self.next();
            // `-` directly before a literal is part of the literal
            if let Tok::Int(n) = *self.peek() {
                self.next();
                return Ok(Expr::Int(-n));
            }
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, span) = self.next();
        Ok(match tok {
            Tok::Int(n) => Expr::Int(n),
            Tok::Str(s) => Expr::Str(s),
            Tok::True => Expr::Bool(true),
            Tok::False => Expr::Bool(false),
            Tok::None => Expr::None,
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                e
            }
            Tok::Ident(name) => {
                if self.at(&Tok::LParen) {
                    self.next();
                    let mut args = Vec::new();
                    if !self.at(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.at(&Tok::Comma) {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Expr::Call(Call { name, args, span })
                } else {
                    Expr::Var(name, span)
                }
            }
            other => {
                return Err(ParseError {
                    line: span.line,
                    col: span.col,
                    message: format!("expected an expression, found {}", other.describe()),
                })
            }
        })
    }
}
