//! The three experiments: scripted or live unit tests, open-ended resource
//! gathering and open-ended building.

mod open;
mod replay;
mod report;
mod unit;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use voxagent_core::agents::{AgentConfig, IterationRecord, LlmBackend};
use voxagent_core::skills::SkillLibrary;
use voxagent_core::verify::{shape_signature, verify_structure, Template};
use voxagent_core::world::{VoxelWorld, WorldDiff, WorldKind};

pub use open::{run_open_ended, OpenRun};
pub use replay::{replay, ReplayReport, ReplayTrial};
pub use report::{
    BuildingReport, BuildingTask, Cell, Milestones, NamedCell, ResourceReport, TableRow, UnitTestReport, UnitTrialRow,
    REFERENCE_BUILDING, REFERENCE_MILESTONES, REFERENCE_MILESTONE_ROWS, REFERENCE_UNIT_TABLE,
};
pub use unit::{run_unit_tests, UnitRun};

use crate::backend::{HttpBackend, ScriptFile};
use crate::config::{BackendKind, Experiment, TrialConfig};
use crate::reference;

/// How a trial's loop stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum RunEnd {
    /// Ran every iteration it was allowed.
    Completed,
    /// The curriculum script had no further tasks.
    ScriptEnded,
    /// Stopped by a backend failure; results are partial.
    Incomplete(String),
}

impl RunEnd {
    pub fn is_complete(&self) -> bool {
        !matches!(self, RunEnd::Incomplete(_))
    }
}

/// Ground-truth judgement of one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub success: bool,
    pub reason: String,
    /// Shape signature of the iteration's build, when it has one.
    pub signature: Option<String>,
}

/// Everything needed to report on, write out and replay one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Directory-safe trial name, unique within a run.
    pub id: String,
    pub experiment: Experiment,
    pub world_kind: WorldKind,
    pub seed: u64,
    /// Unit-test structure, if any.
    pub template: Option<String>,
    pub provisioned: Vec<(String, u32)>,
    pub agent_config: AgentConfig,
    pub backend: String,
    /// Library the trial started from, if not empty.
    pub initial_skills: Option<String>,
    pub iterations: Vec<IterationRecord>,
    /// Oracle result per iteration (same order as `iterations`).
    pub oracle: Vec<Option<OracleVerdict>>,
    /// Item names held after each iteration.
    pub held: Vec<Vec<String>>,
    /// Iterations lost to a curriculum reply that could not be parsed.
    pub aborted: Vec<(u32, String)>,
    pub end: RunEnd,
    pub items_seen: Vec<String>,
    pub skills: String,
}

/// Where agent replies come from.
#[derive(Debug, Clone)]
pub enum BackendSource {
    Script(ScriptFile),
    Http {
        base_url: String,
        model: String,
        temperature: f64,
        api_key: Option<String>,
        timeout: Duration,
    },
}

pub type BoxedBackend = Box<dyn LlmBackend + Send>;

impl BackendSource {
    pub fn from_config(c: &TrialConfig) -> anyhow::Result<BackendSource> {
        let b = &c.backend;
        Ok(match b.kind {
            BackendKind::Scripted => BackendSource::Script(match &b.script_path {
                Some(path) => ScriptFile::load(path)?,
                None => match c.experiment {
                    Experiment::UnitTests => reference::unit_test_suite(),
                    Experiment::Resources => reference::resource_script(),
                    Experiment::Building => reference::building_script(),
                },
            }),
            BackendKind::Http => BackendSource::Http {
                base_url: b.base_url.clone(),
                model: b.model.clone(),
                temperature: b.temperature,
                api_key: std::env::var(&b.api_key_env).ok(),
                timeout: Duration::from_secs(b.timeout_secs),
            },
        })
    }

    fn http(&self) -> Option<Result<BoxedBackend, String>> {
        match self {
            BackendSource::Http {
                base_url,
                model,
                temperature,
                api_key,
                timeout,
            } => Some(
                HttpBackend::new(base_url, model, *temperature, api_key.clone(), *timeout)
                    .map(|b| Box::new(b) as BoxedBackend)
                    .map_err(|e| e.to_string()),
            ),
            BackendSource::Script(_) => None,
        }
    }

    pub fn unit_backend(&self, t: Template, kind: WorldKind) -> Result<BoxedBackend, String> {
        match self {
            BackendSource::Script(f) => f
                .for_unit_test(t, kind)
                .map(|s| Box::new(voxagent_core::agents::ScriptedBackend::new(s)) as BoxedBackend)
                .ok_or_else(|| format!("the script has no entry for {}.{}", t.name(), kind.name())),
            _ => self.http().expect("http source"),
        }
    }

    pub fn open_backend(&self) -> Result<BoxedBackend, String> {
        match self {
            BackendSource::Script(f) => f
                .for_open_ended()
                .map(|s| Box::new(voxagent_core::agents::ScriptedBackend::new(s)) as BoxedBackend)
                .ok_or_else(|| String::from("the script suite has no \"*\" entry")),
            _ => self.http().expect("http source"),
        }
    }
}

fn hex(sig: u64) -> String {
    format!("{sig:016x}")
}

/// Oracle verdict for a unit-test structure.
pub fn judge_template(t: Template, diff: &WorldDiff, world: &VoxelWorld) -> OracleVerdict {
    let r = verify_structure(t, diff, world);
    OracleVerdict {
        success: r.success,
        reason: r.reason,
        signature: shape_signature(diff).ok().map(hex),
    }
}

/// Whether a proposed task is about building something.
pub fn is_building_task(task: &str) -> bool {
    const BUILD: [&str; 3] = ["create", "build", "construct"];
    const GATHER: [&str; 7] = ["mine", "craft", "smelt", "gather", "equip", "obtain", "collect"];
    for word in task.split(|c: char| !c.is_alphanumeric()).map(str::to_lowercase) {
        if BUILD.contains(&word.as_str()) {
            return true;
        }
        if GATHER.contains(&word.as_str()) {
            return false;
        }
    }
    false
}

/// The unit-test structure a building task asks for, if it names one.
pub fn template_for_task(task: &str) -> Option<Template> {
    let t = task.to_lowercase();
    [
        ("pyramid", Template::Pyramid),
        ("portal", Template::Portal),
        ("stair", Template::Stairs),
        ("wall", Template::Wall),
        ("pole", Template::Pole),
        ("pillar", Template::Pole),
    ]
    .into_iter()
    .find(|(k, _)| t.contains(k))
    .map(|(_, v)| v)
}

/// Oracle verdict for an open-ended building iteration. Structures without
/// a template count when the critic approved and something was built.
pub fn judge_building(rec: &IterationRecord, world: &VoxelWorld) -> OracleVerdict {
    match template_for_task(&rec.task) {
        Some(t) => judge_template(t, &rec.diff, world),
        None => {
            let signature = shape_signature(&rec.diff).ok().map(hex);
            let success = rec.success && signature.is_some();
            let reason = if success {
                String::from("no template for this structure; critic verdict accepted")
            } else if signature.is_none() {
                String::from("nothing was built")
            } else {
                String::from("critic rejected the build")
            };
            OracleVerdict {
                success,
                reason,
                signature,
            }
        }
    }
}

pub fn load_initial_skills(c: &TrialConfig) -> anyhow::Result<Option<String>> {
    match &c.skills_path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("cannot read skills {}: {e}", p.display()))?;
            SkillLibrary::from_json(&text).map_err(|e| anyhow::anyhow!("bad skill library {}: {e}", p.display()))?;
            Ok(Some(text))
        }
        None => Ok(None),
    }
}

pub fn library_from(initial: &Option<String>) -> SkillLibrary {
    match initial {
        Some(text) => SkillLibrary::from_json(text).expect("validated when loaded"),
        None => SkillLibrary::default(),
    }
}

pub(crate) fn held_items(agent: &voxagent_core::world::AgentState) -> Vec<String> {
    agent.inventory.iter().map(|(n, _)| n.to_owned()).collect()
}
