use alloc::string::String;
use alloc::vec::Vec;

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Fn,
    Let,
    Repeat,
    As,
    If,
    Else,
    And,
    Or,
    Not,
    True,
    False,
    None,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        use alloc::format;
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Fn => "fn",
            Tok::Let => "let",
            Tok::Repeat => "repeat",
            Tok::As => "as",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::True => "true",
            Tok::False => "false",
            Tok::None => "none",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            _ => "",
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "fn", "let", "repeat", "as", "if", "else", "and", "or", "not", "true", "false", "none",
];

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "fn" => Tok::Fn,
        "let" => Tok::Let,
        "repeat" => Tok::Repeat,
        "as" => Tok::As,
        "if" => Tok::If,
        "else" => Tok::Else,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "true" => Tok::True,
        "false" => Tok::False,
        "none" => Tok::None,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |line, col, msg: &str| ParseError {
        line,
        col,
        message: msg.into(),
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let bump = |i: &mut usize, col: &mut u32, n: usize| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            bump(&mut i, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump(&mut i, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump(&mut i, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| err(span.line, span.col, "integer literal out of range"))?;
            out.push((Tok::Int(n), span));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump(&mut i, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            out.push((keyword(&text).unwrap_or(Tok::Ident(text)), span));
            continue;
        }
        if c == '"' {
            bump(&mut i, &mut col, 1);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(span.line, span.col, "unterminated string literal")),
                    Some('"') => {
                        bump(&mut i, &mut col, 1);
                        break;
                    }
                    Some('\\') => {
                        let esc = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            _ => return Err(err(line, col, "invalid escape sequence")),
                        };
                        s.push(esc);
                        bump(&mut i, &mut col, 2);
                    }
                    Some(ch) => {
                        s.push(*ch);
                        bump(&mut i, &mut col, 1);
                    }
                }
            }
            out.push((Tok::Str(s), span));
            continue;
        }
        let two = |a: char, b: char| c == a && chars.get(i + 1) == Some(&b);
        let (tok, n) = if two('=', '=') {
            (Tok::EqEq, 2)
        } else if two('!', '=') {
            (Tok::Ne, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('>', '=') {
            (Tok::Ge, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Assign,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                other => return Err(err(line, col, &alloc::format!("unexpected character `{other}`"))),
            };
            (t, 1)
        };
        out.push((tok, span));
        bump(&mut i, &mut col, n);
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}
