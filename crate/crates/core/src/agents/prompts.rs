use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AgentRole;

/// Which set of system prompts to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptVariant {
    Voyager,
    VoyagerGpt4o,
    #[default]
    Voyagervision,
}

impl PromptVariant {
    pub const ALL: [PromptVariant; 3] = [
        PromptVariant::Voyager,
        PromptVariant::VoyagerGpt4o,
        PromptVariant::Voyagervision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptVariant::Voyager => "voyager",
            PromptVariant::VoyagerGpt4o => "voyager_gpt4o",
            PromptVariant::Voyagervision => "voyagervision",
        }
    }

    pub fn from_name(s: &str) -> Option<PromptVariant> {
        PromptVariant::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// The raw template text for an agent and variant.
pub fn template(role: AgentRole, variant: PromptVariant) -> &'static str {
    use AgentRole::*;
    use PromptVariant::*;
    match (role, variant) {
        (Action, Voyager) => include_str!("../../assets/prompts/action_voyager.txt"),
        (Action, VoyagerGpt4o) => include_str!("../../assets/prompts/action_voyager_gpt4o.txt"),
        (Action, Voyagervision) => include_str!("../../assets/prompts/action_voyagervision.txt"),
        (Critic, Voyager) => include_str!("../../assets/prompts/critic_voyager.txt"),
        (Critic, VoyagerGpt4o) => include_str!("../../assets/prompts/critic_voyager_gpt4o.txt"),
        (Critic, Voyagervision) => include_str!("../../assets/prompts/critic_voyagervision.txt"),
        (Curriculum, Voyager) => include_str!("../../assets/prompts/curriculum_voyager.txt"),
        (Curriculum, VoyagerGpt4o) => include_str!("../../assets/prompts/curriculum_voyager_gpt4o.txt"),
        (Curriculum, Voyagervision) => include_str!("../../assets/prompts/curriculum_voyagervision.txt"),
    }
}

/// Placeholder names that may appear in templates.
pub const SLOTS: [&str; 2] = ["{programs}", "{response_format}"];

/// Reply format requested from the action agent.
pub const ACTION_RESPONSE_FORMAT: &str = "Explain: ...
Plan:
1) ...
2) ...
3) ...
...
Code:
```
// program in the action language
```";

/// Replaces each `{name}` slot with its value. Text outside slots is
/// copied unchanged; unknown braces are left alone.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'outer: while !rest.is_empty() {
        if rest.starts_with('{') {
            for (name, value) in values {
                let slot = format!("{{{name}}}");
                if rest.starts_with(slot.as_str()) {
                    out.push_str(value);
                    rest = &rest[slot.len()..];
                    continue 'outer;
                }
            }
        }
        let mut chars = rest.chars();
        out.push(chars.next().expect("non-empty"));
        rest = chars.as_str();
    }
    out
}

/// Splits a template into the literal pieces between slots.
pub fn literal_pieces(template: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut rest = template;
    loop {
        let next = SLOTS.iter().filter_map(|s| rest.find(s).map(|i| (i, s.len()))).min();
        match next {
            Some((i, len)) => {
                pieces.push(&rest[..i]);
                rest = &rest[i + len..];
            }
            None => {
                pieces.push(rest);
                return pieces;
            }
        }
    }
}

/// The system prompt for the action agent: the language card and the
/// retrieved skills go where the template lists useful programs.
pub fn action_system(variant: PromptVariant, skills: &[&str]) -> String {
    let mut programs = String::from(crate::actlang::LANGUAGE_GUIDE.trim_end());
    for s in skills {
        programs.push_str("\n\n");
        programs.push_str(s.trim_end());
    }
    fill(
        template(AgentRole::Action, variant),
        &[("programs", &programs), ("response_format", ACTION_RESPONSE_FORMAT)],
    )
}

pub fn system_prompt(role: AgentRole, variant: PromptVariant, skills: &[&str]) -> String {
    match role {
        AgentRole::Action => action_system(variant, skills),
        _ => String::from(template(role, variant)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_keeps_everything_else() {
        assert_eq!(fill("a {x} b {y} {z}", &[("x", "1"), ("y", "{x}")]), "a 1 b {x} {z}");
        assert_eq!(fill("ünï {x}", &[("x", "é")]), "ünï é");
    }

    #[test]
    fn golden_outside_slots() {
        for role in [AgentRole::Curriculum, AgentRole::Action, AgentRole::Critic] {
            for v in PromptVariant::ALL {
                let raw = template(role, v);
                let filled = system_prompt(role, v, &["fn a() {}"]);
                let pieces = literal_pieces(raw);
                // every literal piece appears, in order, byte for byte
                let (first, last) = (pieces[0], pieces[pieces.len() - 1]);
                assert!(filled.starts_with(first), "{role:?}/{v:?} prefix");
                assert!(filled.ends_with(last), "{role:?}/{v:?} suffix");
                let mut at = first.len();
                for (i, piece) in pieces.iter().enumerate().skip(1).take(pieces.len().saturating_sub(2)) {
                    let found = filled[at..].find(piece).map(|k| k + at);
                    let k = found.unwrap_or_else(|| panic!("{role:?}/{v:?} piece {i} missing"));
                    at = k + piece.len();
                }
                if pieces.len() > 1 {
                    assert!(at <= filled.len() - last.len(), "{role:?}/{v:?} overlap");
                }
                if role == AgentRole::Action {
                    assert_eq!(pieces.len(), 3);
                    assert!(filled.contains("fn a() {}"));
                    assert!(filled.contains("```\n// program in the action language\n```"));
                } else {
                    assert_eq!(filled, raw);
                }
            }
        }
    }
}
