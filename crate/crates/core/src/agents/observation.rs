use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::world::{nearby_blocks, time_label, AgentState, VoxelWorld};

/// Half-width of the cube scanned for "Nearby blocks".
pub const NEARBY_RADIUS: i32 = 16;
/// Iterations remembered for "Other blocks that are recently seen".
pub const SEEN_WINDOW: usize = 5;

/// What the agents are told about the world. Fields outside the
/// simulation's scope (entities, chests) render as fixed placeholders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub biome: String,
    pub time_label: String,
    pub nearby_blocks: Vec<String>,
    pub other_seen_blocks: Vec<String>,
    pub health: f64,
    pub hunger: f64,
    pub position: String,
    pub equipment: Option<String>,
    pub inventory_rendered: String,
    pub chests: String,
    pub completed_tasks: Vec<String>,
    pub failed_tasks: Vec<String>,
    pub task: String,
    pub context: String,
    pub last_code: Option<String>,
    pub last_error: Option<String>,
    pub chat_log: Vec<String>,
    pub critique: String,
}

/// Progress carried between iterations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub completed: Vec<String>,
    pub failed: Vec<String>,
    /// Nearby block names at the start of recent iterations, oldest first.
    pub recent_nearby: Vec<Vec<String>>,
}

impl History {
    pub fn remember_nearby(&mut self, blocks: Vec<String>) {
        self.recent_nearby.push(blocks);
        if self.recent_nearby.len() > SEEN_WINDOW {
            self.recent_nearby.remove(0);
        }
    }
}

fn or_none(items: &[String]) -> String {
    if items.is_empty() {
        String::from("None")
    } else {
        items.join(", ")
    }
}

fn or_placeholder(s: &str, placeholder: &str) -> String {
    if s.trim().is_empty() {
        String::from(placeholder)
    } else {
        String::from(s)
    }
}

pub fn build_observation(world: &VoxelWorld, agent: &AgentState, history: &History) -> Observation {
    let nearby: Vec<String> = nearby_blocks(world, agent.feet, NEARBY_RADIUS)
        .into_iter()
        .map(String::from)
        .collect();
    let current: BTreeSet<&String> = nearby.iter().collect();
    let other: BTreeSet<String> = history
        .recent_nearby
        .iter()
        .flatten()
        .filter(|b| !current.contains(b))
        .cloned()
        .collect();
    let e = agent.eye();
    Observation {
        biome: world.biome_at(agent.feet).name().to_string(),
        time_label: time_label(world.time).to_string(),
        nearby_blocks: nearby,
        other_seen_blocks: other.into_iter().collect(),
        health: agent.health(),
        hunger: agent.hunger(),
        position: format!("x={:.1}, y={:.1}, z={:.1}", e.x, agent.feet.y as f64, e.z),
        equipment: agent.equipment.clone(),
        inventory_rendered: agent.inventory.render(),
        chests: String::from("None"),
        completed_tasks: history.completed.clone(),
        failed_tasks: history.failed.clone(),
        task: String::new(),
        context: String::new(),
        last_code: None,
        last_error: None,
        chat_log: Vec::new(),
        critique: String::new(),
    }
}

impl Observation {
    fn common(&self) -> [(&'static str, String); 5] {
        [
            ("Biome", self.biome.clone()),
            ("Time", self.time_label.clone()),
            ("Nearby blocks", or_none(&self.nearby_blocks)),
            ("Health", format!("{:.1}/20.0", self.health)),
            ("Hunger", format!("{:.1}/20.0", self.hunger)),
        ]
    }

    fn equipment_line(&self) -> String {
        self.equipment.clone().unwrap_or_else(|| String::from("None"))
    }

    /// Lines of the user message for the curriculum agent.
    pub fn render_curriculum(&self) -> String {
        let [biome, time, nearby, health, hunger] = self.common();
        let lines = [
            biome,
            time,
            nearby,
            ("Other blocks that are recently seen", or_none(&self.other_seen_blocks)),
            ("Nearby entities (nearest to farthest)", String::from("None")),
            health,
            hunger,
            ("Position", self.position.clone()),
            ("Equipment", self.equipment_line()),
        ];
        let mut out = join(&lines);
        out.push_str(&self.inventory_rendered);
        out.push('\n');
        out.push_str(&join(&[
            ("Chests", self.chests.clone()),
            ("Completed tasks so far", or_none(&self.completed_tasks)),
            ("Failed tasks that are too hard", or_none(&self.failed_tasks)),
        ]));
        out.trim_end().to_string()
    }

    pub fn render_action(&self) -> String {
        let [biome, time, nearby, health, hunger] = self.common();
        let mut out = String::new();
        match &self.last_code {
            Some(code) => out.push_str(&format!("Code from the last round:\n{}\n\n", code.trim_end())),
            None => out.push_str("Code from the last round: No code in the first round\n\n"),
        }
        out.push_str(&format!(
            "Execution error: {}\n\n",
            self.last_error.as_deref().unwrap_or("No error")
        ));
        let chat = if self.chat_log.is_empty() {
            String::from("None")
        } else {
            self.chat_log.join("\n")
        };
        out.push_str(&format!("Chat log: {chat}\n\n"));
        out.push_str(&join(&[
            biome,
            time,
            nearby,
            ("Nearby entities (nearest to farthest)", String::from("None")),
            health,
            hunger,
            ("Position", self.position.clone()),
            ("Equipment", self.equipment_line()),
        ]));
        out.push_str(&self.inventory_rendered);
        out.push('\n');
        out.push_str(&join(&[
            ("Chests", self.chests.clone()),
            ("Task", self.task.clone()),
            ("Context", or_placeholder(&self.context, "None")),
            ("Critique", or_placeholder(&self.critique, "None")),
        ]));
        out.trim_end().to_string()
    }

    pub fn render_critic(&self) -> String {
        let [biome, time, nearby, health, hunger] = self.common();
        let mut out = join(&[
            biome,
            time,
            nearby,
            health,
            hunger,
            ("Position", self.position.clone()),
            ("Equipment", self.equipment_line()),
        ]);
        out.push_str(&self.inventory_rendered);
        out.push('\n');
        out.push_str(&join(&[
            ("Chests", self.chests.clone()),
            ("Task", self.task.clone()),
            ("Context", or_placeholder(&self.context, "None")),
        ]));
        out.trim_end().to_string()
    }
}

fn join(lines: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in lines {
        out.push_str(k);
        out.push_str(": ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// Field labels in the order a rendered message presents them.
pub fn labels(rendered: &str) -> Vec<String> {
    rendered
        .lines()
        .filter_map(|l| l.split_once(':').map(|(k, _)| k))
        .filter(|k| !k.is_empty() && k.chars().next().is_some_and(|c| c.is_ascii_uppercase()))
        .map(normalize_label)
        .collect()
}

fn normalize_label(k: &str) -> String {
    if k.starts_with("Inventory (") {
        String::from("Inventory")
    } else {
        String::from(k)
    }
}

/// Labels a template says it will provide, in order: the `Label: ...`
/// lines of its "I will give you" section.
pub fn template_labels(template: &str) -> Vec<String> {
    let start = template.find("I will give you").expect("input section");
    let section = &template[start..];
    let mut out = Vec::new();
    for line in section.lines().skip(1) {
        let line = line.trim_end();
        if line.is_empty() && !out.is_empty() {
            break;
        }
        if line.starts_with("Question") || line.starts_with("Answer") || line == "..." {
            continue;
        }
        if let Some((k, _)) = line.split_once(':') {
            if k.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                out.push(normalize_label(k));
            }
        }
    }
    out
}
