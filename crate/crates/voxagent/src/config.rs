//! Experiment configuration: JSON file, command-line overrides, defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use voxagent_core::agents::{AgentConfig, PromptVariant};
use voxagent_core::verify::Template;
use voxagent_core::world::WorldKind;

use crate::reference::{BUILDING_SEED, RESOURCE_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    UnitTests,
    Resources,
    Building,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::UnitTests => "unit_tests",
            Experiment::Resources => "resources",
            Experiment::Building => "building",
        }
    }

    pub fn default_iterations(self) -> u32 {
        match self {
            Experiment::UnitTests => 1,
            Experiment::Resources => 30,
            Experiment::Building => 50,
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            Experiment::Building => BUILDING_SEED,
            _ => RESOURCE_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Scripted,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSpec {
    pub kind: BackendKind,
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    /// Scripted backend; without one the built-in reference script for the
    /// experiment is used.
    pub script_path: Option<PathBuf>,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec {
            kind: BackendKind::Scripted,
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            temperature: 0.0,
            script_path: None,
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_secs: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSet {
    pub flat: Vec<u64>,
    pub regular: Vec<u64>,
}

impl Default for SeedSet {
    fn default() -> Self {
        SeedSet {
            flat: vec![1, 2, 3, 4, 5],
            regular: vec![1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub experiment: Experiment,
    pub backend: BackendSpec,
    pub prompt_variant: PromptVariant,
    /// Unit-test worlds.
    pub seeds: SeedSet,
    /// Unit-test structures, by name.
    pub tasks: Vec<String>,
    /// Open-ended world; `None` picks the experiment's default.
    pub seed: Option<u64>,
    pub world_kind: WorldKind,
    /// `None` picks the experiment's default (30 or 50).
    pub max_iterations: Option<u32>,
    /// Worker threads for unit-test trials; 0 uses every core.
    pub parallelism: usize,
    pub out_dir: PathBuf,
    pub max_retries: u32,
    pub skill_top_k: usize,
    pub screenshots: bool,
    pub image_width: u32,
    pub image_height: u32,
    /// Also write PNG copies of screenshots.
    pub png: bool,
    /// Skill library to start from instead of an empty one.
    pub skills_path: Option<PathBuf>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        let agent = AgentConfig::default();
        TrialConfig {
            experiment: Experiment::UnitTests,
            backend: BackendSpec::default(),
            prompt_variant: PromptVariant::default(),
            seeds: SeedSet::default(),
            tasks: Template::ALL.iter().map(|t| t.name().to_owned()).collect(),
            seed: None,
            world_kind: WorldKind::Regular,
            max_iterations: None,
            parallelism: 0,
            out_dir: PathBuf::from("runs"),
            max_retries: agent.max_retries,
            skill_top_k: agent.skill_top_k,
            screenshots: agent.screenshots,
            image_width: agent.image_width,
            image_height: agent.image_height,
            png: false,
            skills_path: None,
        }
    }
}

impl TrialConfig {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> anyhow::Result<TrialConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let mut c: TrialConfig =
            serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("bad config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = c.backend.script_path.as_mut() {
            rebase(p);
        }
        if let Some(p) = c.skills_path.as_mut() {
            rebase(p);
        }
        Ok(c)
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            max_retries: self.max_retries,
            skill_top_k: self.skill_top_k,
            prompt_variant: self.prompt_variant,
            screenshots: self.screenshots,
            image_width: self.image_width,
            image_height: self.image_height,
            ..AgentConfig::default()
        }
    }

    pub fn templates(&self) -> anyhow::Result<Vec<Template>> {
        self.tasks
            .iter()
            .map(|n| Template::from_name(n).ok_or_else(|| anyhow::anyhow!("unknown unit-test task {n:?}")))
            .collect()
    }

    pub fn open_seed(&self) -> u64 {
        self.seed.unwrap_or(self.experiment.default_seed())
    }

    pub fn iterations(&self) -> u32 {
        self.max_iterations.unwrap_or(self.experiment.default_iterations())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.max_retries >= 1, "max_retries must be at least 1");
        anyhow::ensure!(
            self.image_width >= 16 && self.image_height >= 16,
            "screenshots must be at least 16x16"
        );
        self.templates()?;
        Ok(())
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string_pretty(&v).expect("config serializes")
    }
}

/// One optional override per config value.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// Model backend
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
    /// Chat-completions base URL (http backend)
    #[arg(long)]
    pub base_url: Option<String>,
    /// Model name (http backend)
    #[arg(long)]
    pub model: Option<String>,
    /// Sampling temperature (http backend)
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Script file (scripted backend)
    #[arg(long = "script")]
    pub script_path: Option<PathBuf>,
    /// Environment variable with the API key
    #[arg(long)]
    pub api_key_env: Option<String>,
    /// Request timeout in seconds
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    /// Prompt set: voyager, voyager_gpt4o or voyagervision
    #[arg(long, value_parser = parse_variant)]
    pub prompt_variant: Option<PromptVariant>,
    /// Flat unit-test seeds, comma separated
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub flat_seeds: Option<Vec<u64>>,
    /// Regular unit-test seeds, comma separated
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub regular_seeds: Option<Vec<u64>>,
    /// Unit-test structures, comma separated
    #[arg(long, value_delimiter = ',')]
    pub tasks: Option<Vec<String>>,
    /// World kind of open-ended runs
    #[arg(long, value_parser = parse_kind)]
    pub world_kind: Option<WorldKind>,
    /// Iteration limit of open-ended runs
    #[arg(long)]
    pub max_iterations: Option<u32>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Action rounds per iteration
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Skills retrieved into the action prompt
    #[arg(long)]
    pub skill_top_k: Option<usize>,
    /// Attach screenshots to agent calls
    #[arg(long)]
    pub screenshots: Option<bool>,
    /// Screenshot width in pixels
    #[arg(long)]
    pub image_width: Option<u32>,
    /// Screenshot height in pixels
    #[arg(long)]
    pub image_height: Option<u32>,
    /// Also write PNG copies of screenshots
    #[arg(long)]
    pub png: Option<bool>,
    /// Skill library to start from
    #[arg(long = "skills")]
    pub skills_path: Option<PathBuf>,
}

pub fn parse_variant(s: &str) -> Result<PromptVariant, String> {
    PromptVariant::from_name(s).ok_or_else(|| format!("unknown prompt variant {s:?}"))
}

pub fn parse_kind(s: &str) -> Result<WorldKind, String> {
    WorldKind::from_name(s).ok_or_else(|| format!("unknown world kind {s:?}"))
}

impl Overrides {
    pub fn apply(&self, c: &mut TrialConfig) {
        fn set<T: Clone>(dst: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *dst = v.clone();
            }
        }
        set(&mut c.backend.kind, &self.backend);
        set(&mut c.backend.base_url, &self.base_url);
        set(&mut c.backend.model, &self.model);
        set(&mut c.backend.temperature, &self.temperature);
        if self.script_path.is_some() {
            c.backend.script_path = self.script_path.clone();
        }
        set(&mut c.backend.api_key_env, &self.api_key_env);
        set(&mut c.backend.timeout_secs, &self.timeout_secs);
        set(&mut c.prompt_variant, &self.prompt_variant);
        set(&mut c.seeds.flat, &self.flat_seeds);
        set(&mut c.seeds.regular, &self.regular_seeds);
        set(&mut c.tasks, &self.tasks);
        set(&mut c.world_kind, &self.world_kind);
        if self.max_iterations.is_some() {
            c.max_iterations = self.max_iterations;
        }
        set(&mut c.parallelism, &self.parallelism);
        set(&mut c.max_retries, &self.max_retries);
        set(&mut c.skill_top_k, &self.skill_top_k);
        set(&mut c.screenshots, &self.screenshots);
        set(&mut c.image_width, &self.image_width);
        set(&mut c.image_height, &self.image_height);
        set(&mut c.png, &self.png);
        if self.skills_path.is_some() {
            c.skills_path = self.skills_path.clone();
        }
    }
}
