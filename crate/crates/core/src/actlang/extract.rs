use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no code found in the response")]
pub struct NoCodeFound;

/// The program text in an LLM reply: the interior of the last fenced code
/// block, or failing that the longest line-suffix of the reply that parses.
pub fn extract_code(response: &str) -> Result<String, NoCodeFound> {
    if let Some(code) = last_fenced_block(response) {
        return Ok(code);
    }
    let lines: Vec<&str> = response.lines().collect();
    for start in 0..lines.len() {
        let suffix = lines[start..].join("\n");
        if suffix.trim().is_empty() {
            break;
        }
        if parse(&suffix).is_ok_and(|p| !p.body.is_empty() || !p.functions.is_empty()) {
            return Ok(suffix.trim().to_string());
        }
    }
    Err(NoCodeFound)
}

fn last_fenced_block(text: &str) -> Option<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("```") {
            match current.take() {
                Some(body) => blocks.push(body.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(body) = current.as_mut() {
            body.push(line);
        }
    }
    blocks.pop().map(|b| {
        let mut s = b.trim_end().to_string();
        s.push('\n');
        s
    })
}
