use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::hash::Fnv64;
use crate::perception::Image;

/// Which of the three agents is calling the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Curriculum,
    Action,
    Critic,
}

impl AgentRole {
    pub fn name(self) -> &'static str {
        match self {
            AgentRole::Curriculum => "curriculum",
            AgentRole::Action => "action",
            AgentRole::Critic => "critic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Part {
    Text(String),
    Image(Image),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub role: Role,
    pub parts: Vec<Part>,
}

impl Message {
    pub fn text(role: Role, text: impl Into<String>) -> Message {
        Message {
            role,
            parts: alloc::vec![Part::Text(text.into())],
        }
    }

    /// A user message with text followed by an optional image.
    pub fn user(text: impl Into<String>, image: Option<&Image>) -> Message {
        let mut m = Message::text(Role::User, text);
        if let Some(img) = image {
            m.parts.push(Part::Image(img.clone()));
        }
        m
    }

    /// All text parts joined by newlines.
    pub fn joined_text(&self) -> String {
        let texts: Vec<&str> = self
            .parts
            .iter()
            .filter_map(|p| match p {
                Part::Text(t) => Some(t.as_str()),
                Part::Image(_) => None,
            })
            .collect();
        texts.join("\n")
    }
}

/// Stable hash of a conversation, images included.
pub fn prompt_hash(messages: &[Message]) -> u64 {
    let mut h = Fnv64::new();
    for m in messages {
        h.write(m.role.name().as_bytes());
        h.write_u8(0);
        for p in &m.parts {
            match p {
                Part::Text(t) => {
                    h.write_u8(b'T');
                    h.write_u64(t.len() as u64);
                    h.write(t.as_bytes());
                }
                Part::Image(img) => {
                    h.write_u8(b'I');
                    h.write_u64(img.width as u64);
                    h.write_u64(img.height as u64);
                    h.write(&img.data);
                }
            }
        }
    }
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend transport error: {0}")]
    Transport(String),
    #[error("script has no {role} response for call {index}")]
    ScriptExhausted { role: &'static str, index: usize },
}

/// A chat model. Backends only answer; they never touch the world.
pub trait LlmBackend {
    fn identity(&self) -> String;
    fn complete(&mut self, role: AgentRole, messages: &[Message]) -> Result<String, BackendError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for &mut B {
    fn identity(&self) -> String {
        (**self).identity()
    }

    fn complete(&mut self, role: AgentRole, messages: &[Message]) -> Result<String, BackendError> {
        (**self).complete(role, messages)
    }
}

/// Canned responses per agent role, consumed in call order. A role's
/// `default` answers every call past the end of its list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub responses: BTreeMap<AgentRole, Vec<String>>,
    #[serde(default)]
    pub defaults: BTreeMap<AgentRole, String>,
}

impl Script {
    pub fn push(&mut self, role: AgentRole, response: impl Into<String>) -> &mut Self {
        self.responses.entry(role).or_default().push(response.into());
        self
    }

    pub fn with_default(mut self, role: AgentRole, response: impl Into<String>) -> Self {
        self.defaults.insert(role, response.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    script: Script,
    calls: BTreeMap<AgentRole, usize>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> ScriptedBackend {
        ScriptedBackend {
            script,
            calls: BTreeMap::new(),
        }
    }

    pub fn calls(&self, role: AgentRole) -> usize {
        self.calls.get(&role).copied().unwrap_or(0)
    }
}

impl LlmBackend for ScriptedBackend {
    fn identity(&self) -> String {
        if self.script.name.is_empty() {
            String::from("scripted")
        } else {
            format!("scripted:{}", self.script.name)
        }
    }

    fn complete(&mut self, role: AgentRole, _messages: &[Message]) -> Result<String, BackendError> {
        let index = self.calls(role);
        self.calls.insert(role, index + 1);
        self.script
            .responses
            .get(&role)
            .and_then(|r| r.get(index))
            .or_else(|| self.script.defaults.get(&role))
            .cloned()
            .ok_or(BackendError::ScriptExhausted {
                role: role.name(),
                index,
            })
    }
}
