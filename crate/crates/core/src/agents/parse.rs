use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskProposal {
    pub reasoning: String,
    pub task: String,
    #[serde(default)]
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub reasoning: String,
    pub success: bool,
    pub critique: String,
}

fn label<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let t = line.trim_start();
    let head = t.get(..name.len())?;
    if head.eq_ignore_ascii_case(name) && t[name.len()..].starts_with(':') {
        Some(t[name.len() + 1..].trim())
    } else {
        None
    }
}

/// Reads `Reasoning:` / `Task:` (and optionally `Context:`) lines, case
/// insensitively. Reasoning may continue over several lines.
pub fn parse_proposal(reply: &str) -> Result<TaskProposal, String> {
    let mut reasoning: Vec<&str> = Vec::new();
    let mut task: Option<&str> = None;
    let mut context = String::new();
    let mut in_reasoning = false;
    for line in reply.lines() {
        if let Some(r) = label(line, "reasoning") {
            reasoning.push(r);
            in_reasoning = true;
        } else if let Some(t) = label(line, "task") {
            if task.is_none() {
                task = Some(t);
            }
            in_reasoning = false;
        } else if let Some(c) = label(line, "context") {
            context = c.to_string();
            in_reasoning = false;
        } else if in_reasoning && !line.trim().is_empty() {
            reasoning.push(line.trim());
        }
    }
    let task = task
        .map(|t| t.trim_matches(|c| c == '"' || c == '*').trim())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| String::from("the reply has no non-empty \"Task:\" line"))?;
    Ok(TaskProposal {
        reasoning: reasoning.join(" "),
        task: task.to_string(),
        context,
    })
}

/// Parses a critic reply: a JSON object with exactly `reasoning`,
/// `success` and `critique`. Markdown fences and prose around the
/// outermost braces are ignored.
pub fn parse_verdict(reply: &str) -> Result<Verdict, String> {
    let start = reply
        .find('{')
        .ok_or_else(|| String::from("no JSON object in the reply"))?;
    let end = reply
        .rfind('}')
        .filter(|e| *e > start)
        .ok_or_else(|| String::from("no JSON object in the reply"))?;
    let body = &reply[start..=end];
    let value: Value = serde_json::from_str(body)
        .or_else(|_| serde_json::from_str(&strip_trailing_commas(body)))
        .map_err(|e| alloc::format!("invalid JSON: {e}"))?;
    let obj = value
        .as_object()
        .ok_or_else(|| String::from("the JSON value is not an object"))?;
    let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    if keys != ["critique", "reasoning", "success"] {
        return Err(alloc::format!(
            "expected keys reasoning, success, critique; got {}",
            keys.join(", ")
        ));
    }
    let reasoning = obj["reasoning"]
        .as_str()
        .ok_or_else(|| String::from("\"reasoning\" must be a string"))?;
    let success = obj["success"]
        .as_bool()
        .ok_or_else(|| String::from("\"success\" must be a boolean"))?;
    let critique = obj["critique"]
        .as_str()
        .ok_or_else(|| String::from("\"critique\" must be a string"))?;
    if !success && critique.trim().is_empty() {
        return Err(String::from("a failing verdict needs a critique"));
    }
    Ok(Verdict {
        reasoning: reasoning.to_string(),
        success,
        critique: critique.to_string(),
    })
}

/// Drops commas that directly precede `}` or `]` outside strings, which
/// the critic template's own example contains.
fn strip_trailing_commas(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut in_str = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_str {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        if c == '"' {
            in_str = true;
        } else if c == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some('}') | Some(']')) {
                continue;
            }
        }
        out.push(c);
    }
    out
}
