//! The skill library: programs that completed a task, retrievable by
//! similarity of their descriptions.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::actlang::{self, Expr, FnDef, Program, Span, Stmt, StmtKind};
use crate::hash::fnv1a;

/// Dimension of the default embedding.
pub const EMBED_DIM: usize = 512;
/// Version written into saved libraries.
pub const FORMAT_VERSION: u32 = 1;
/// Default number of skills shown to the action agent.
pub const DEFAULT_TOP_K: usize = 5;

/// Maps text to a unit vector. Empty text maps to the all-zero vector.
pub trait Embedder {
    fn identity(&self) -> String;
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Hashed character-trigram frequencies over lowercased text.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramEmbedder;

impl Embedder for TrigramEmbedder {
    fn identity(&self) -> String {
        format!("trigram-fnv1a-{EMBED_DIM}")
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        embed(text)
    }
}

/// The default embedding. Texts shorter than three characters count as a
/// single gram.
pub fn embed(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; EMBED_DIM];
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    if chars.is_empty() {
        return v;
    }
    let mut buf = String::new();
    let mut bump = |gram: &[char]| {
        buf.clear();
        buf.extend(gram.iter());
        v[(fnv1a(buf.as_bytes()) % EMBED_DIM as u64) as usize] += 1.0;
    };
    if chars.len() < 3 {
        bump(&chars);
    } else {
        for w in chars.windows(3) {
            bump(w);
        }
    }
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    for x in v.iter_mut() {
        *x /= norm;
    }
    v
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skill {
    pub name: String,
    pub description: String,
    pub source: String,
    pub embedding: Vec<f64>,
    pub created_at_iteration: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkillError {
    #[error("invalid skill source: {0}")]
    InvalidSource(String),
    #[error("the skill description is empty")]
    EmptyDescription,
    #[error("skill library entry {0} is corrupt")]
    CorruptFile(usize),
    #[error("skill library file is not valid: {0}")]
    Malformed(String),
    #[error("unsupported skill library format version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillLibrary {
    pub embedder: String,
    pub skills: Vec<Skill>,
}

impl Default for SkillLibrary {
    fn default() -> Self {
        SkillLibrary::new(&TrigramEmbedder)
    }
}

#[derive(Serialize, Deserialize)]
struct SavedLibrary {
    format_version: u32,
    embedder: String,
    skills: Vec<Skill>,
}

impl SkillLibrary {
    pub fn new(embedder: &dyn Embedder) -> SkillLibrary {
        SkillLibrary {
            embedder: embedder.identity(),
            skills: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Skill> {
        self.skills.iter().find(|s| s.name == name)
    }

    /// Every function defined by stored skills, oldest first.
    pub fn functions(&self) -> Vec<FnDef> {
        self.skills
            .iter()
            .filter_map(|s| actlang::parse(&s.source).ok())
            .flat_map(|p| p.functions)
            .collect()
    }

    /// `program` with the library's functions linked in.
    pub fn link(&self, program: &Program) -> Program {
        program.link(self.functions().iter())
    }

    pub fn add_skill(&mut self, task: &str, source: &str, iteration: u32) -> Result<&Skill, SkillError> {
        self.add_skill_with(&TrigramEmbedder, task, source, iteration)
    }

    /// Stores `source` as a skill for `task`. The source may call functions
    /// of skills already in the library.
    pub fn add_skill_with(
        &mut self,
        embedder: &dyn Embedder,
        task: &str,
        source: &str,
        iteration: u32,
    ) -> Result<&Skill, SkillError> {
        let program = self.validate(source)?;
        let description = describe(task, &program);
        if description.trim().is_empty() {
            return Err(SkillError::EmptyDescription);
        }
        let base = program
            .functions
            .last()
            .map(|f| f.name.clone())
            .unwrap_or_else(|| snake_case(task));
        let base = if base.is_empty() { "skill".to_owned() } else { base };
        let mut name = base.clone();
        let mut n = 2;
        while self.get(&name).is_some() {
            name = format!("{base}-{n}");
            n += 1;
        }
        self.skills.push(Skill {
            name,
            embedding: embedder.embed(&description),
            description,
            source: source.to_owned(),
            created_at_iteration: iteration,
        });
        Ok(self.skills.last().expect("just pushed"))
    }

    fn validate(&self, source: &str) -> Result<Program, SkillError> {
        let program = actlang::parse(source).map_err(|e| SkillError::InvalidSource(format!("{e}")))?;
        actlang::check(&self.link(&program)).map_err(|e| SkillError::InvalidSource(format!("{e}")))?;
        Ok(program)
    }

    pub fn retrieve(&self, query: &str, k: usize) -> Vec<&Skill> {
        self.retrieve_with(&TrigramEmbedder, query, k)
    }

    /// The `k` skills most similar to `query`, best first; equal scores
    /// keep insertion order.
    pub fn retrieve_with(&self, embedder: &dyn Embedder, query: &str, k: usize) -> Vec<&Skill> {
        let q = embedder.embed(query);
        let mut scored: Vec<(f64, &Skill)> = self.skills.iter().map(|s| (cosine(&q, &s.embedding), s)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored.into_iter().take(k).map(|(_, s)| s).collect()
    }

    /// JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let saved = SavedLibrary {
            format_version: FORMAT_VERSION,
            embedder: self.embedder.clone(),
            skills: self.skills.clone(),
        };
        let value = serde_json::to_value(&saved).expect("library serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    /// Parses a saved library. An empty file is an empty library.
    pub fn from_json(text: &str) -> Result<SkillLibrary, SkillError> {
        if text.trim().is_empty() {
            return Ok(SkillLibrary::default());
        }
        let saved: SavedLibrary = serde_json::from_str(text).map_err(|e| SkillError::Malformed(format!("{e}")))?;
        if saved.format_version != FORMAT_VERSION {
            return Err(SkillError::UnsupportedVersion(saved.format_version));
        }
        let mut lib = SkillLibrary {
            embedder: saved.embedder,
            skills: Vec::with_capacity(saved.skills.len()),
        };
        for (i, s) in saved.skills.into_iter().enumerate() {
            let norm = libm::sqrt(cosine(&s.embedding, &s.embedding));
            if lib.validate(&s.source).is_err() || (norm - 1.0).abs() > 1e-9 || lib.get(&s.name).is_some() {
                return Err(SkillError::CorruptFile(i));
            }
            lib.skills.push(s);
        }
        Ok(lib)
    }
}

/// Task text plus the first literal string the program chats, if any.
pub fn describe(task: &str, program: &Program) -> String {
    let mut first: Option<(Span, &str)> = None;
    for f in &program.functions {
        first_chat(&f.body, &mut first);
    }
    first_chat(&program.body, &mut first);
    match first {
        Some((_, s)) => format!("{} {}", task.trim(), s.trim()),
        None => task.trim().to_owned(),
    }
}

fn first_chat<'a>(block: &'a [Stmt], best: &mut Option<(Span, &'a str)>) {
    for s in block {
        match &s.kind {
            StmtKind::Let(_, e) | StmtKind::Assign(_, e) | StmtKind::Expr(e) => chat_in(e, best),
            StmtKind::Repeat { body, .. } => first_chat(body, best),
            StmtKind::If { cond, then, otherwise } => {
                chat_in(cond, best);
                first_chat(then, best);
                if let Some(o) = otherwise {
                    first_chat(o, best);
                }
            }
        }
    }
}

fn chat_in<'a>(e: &'a Expr, best: &mut Option<(Span, &'a str)>) {
    match e {
        Expr::Call(c) => {
            if c.name == "chat" {
                if let [Expr::Str(s)] = c.args.as_slice() {
                    if best.map_or(true, |(sp, _)| c.span < sp) {
                        *best = Some((c.span, s));
                    }
                }
            }
            for a in &c.args {
                chat_in(a, best);
            }
        }
        Expr::Unary(_, a) => chat_in(a, best),
        Expr::Binary(_, a, b) => {
            chat_in(a, best);
            chat_in(b, best);
        }
        _ => {}
    }
}

fn snake_case(task: &str) -> String {
    let mut out = String::new();
    for c in task.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}
