//! Model backends: an OpenAI-style chat-completions client and script files
//! for the scripted backend.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use voxagent_core::agents::{AgentRole, BackendError, LlmBackend, Message, Part, Script};
use voxagent_core::perception::Image;
use voxagent_core::verify::Template;
use voxagent_core::world::WorldKind;

/// Encodes an image as PNG.
pub fn png_bytes(img: &Image) -> Vec<u8> {
    let buf =
        image::RgbImage::from_raw(img.width, img.height, img.data.clone()).expect("image buffer matches its size");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .expect("PNG encoding into memory");
    out.into_inner()
}

/// Chat-completions request body for `messages`.
pub fn request_body(model: &str, temperature: f64, messages: &[Message]) -> Value {
    let msgs: Vec<Value> = messages
        .iter()
        .map(|m| {
            let content: Vec<Value> = m
                .parts
                .iter()
                .map(|p| match p {
                    Part::Text(t) => json!({"type": "text", "text": t}),
                    Part::Image(img) => {
                        let b64 = base64::engine::general_purpose::STANDARD.encode(png_bytes(img));
                        json!({"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{b64}")}})
                    }
                })
                .collect();
            json!({"role": m.role.name(), "content": content})
        })
        .collect();
    json!({"model": model, "messages": msgs, "temperature": temperature})
}

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(
        base_url: &str,
        model: &str,
        temperature: f64,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Result<HttpBackend, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            client,
            base_url: base_url.trim_end_matches('/').to_owned(),
            model: model.to_owned(),
            temperature,
            api_key,
        })
    }
}

impl LlmBackend for HttpBackend {
    fn identity(&self) -> String {
        format!("http:{}@{}", self.model, self.base_url)
    }

    fn complete(&mut self, _role: AgentRole, messages: &[Message]) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", self.base_url);
        let mut req = self
            .client
            .post(&url)
            .json(&request_body(&self.model, self.temperature, messages));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let body: Value = resp
            .json()
            .map_err(|e| BackendError::Transport(format!("{status}: unreadable body: {e}")))?;
        if !status.is_success() {
            return Err(BackendError::Transport(format!("{status}: {body}")));
        }
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::Transport("response has no choices[0].message.content".into()))
    }
}

/// A script file: either one script used for every trial, or a suite with
/// one script per unit-test trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptFile {
    Suite(ScriptSuite),
    Single(Script),
}

/// Scripts looked up by `"<template>.<world kind>"`, then `"<template>"`,
/// then `"*"`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSuite {
    #[serde(default)]
    pub name: String,
    pub scripts: BTreeMap<String, Script>,
}

impl ScriptFile {
    pub fn load(path: &Path) -> anyhow::Result<ScriptFile> {
        let text =
            std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read script {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("bad script file {}: {e}", path.display()))
    }

    pub fn for_unit_test(&self, t: Template, kind: WorldKind) -> Option<Script> {
        match self {
            ScriptFile::Single(s) => Some(s.clone()),
            ScriptFile::Suite(suite) => [
                format!("{}.{}", t.name(), kind.name()),
                t.name().to_owned(),
                "*".to_owned(),
            ]
            .iter()
            .find_map(|k| suite.scripts.get(k))
            .cloned(),
        }
    }

    pub fn for_open_ended(&self) -> Option<Script> {
        match self {
            ScriptFile::Single(s) => Some(s.clone()),
            ScriptFile::Suite(suite) => suite.scripts.get("*").cloned(),
        }
    }

    /// JSON with sorted keys, as shipped.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("script serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("script serializes");
        s.push('\n');
        s
    }
}
