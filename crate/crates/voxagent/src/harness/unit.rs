use rayon::prelude::*;
use voxagent_core::agents::{History, Session};
use voxagent_core::verify::Template;
use voxagent_core::world::{generate_world, WorldKind};

use super::report::UnitTestReport;
use super::{held_items, judge_template, library_from, load_initial_skills, BackendSource, RunEnd, TrialRecord};
use crate::config::{Experiment, TrialConfig};
use crate::reference::{provisioned_inventory, unit_task};

pub struct UnitRun {
    pub trials: Vec<TrialRecord>,
    pub report: UnitTestReport,
}

impl UnitRun {
    pub fn complete(&self) -> bool {
        self.trials.iter().all(|t| t.end.is_complete())
    }
}

/// One manual-task iteration per (structure, world kind, seed).
pub fn run_unit_tests(config: &TrialConfig, source: &BackendSource) -> anyhow::Result<UnitRun> {
    let templates = config.templates()?;
    let initial = load_initial_skills(config)?;
    let mut jobs = Vec::new();
    for &t in &templates {
        for (kind, seeds) in [
            (WorldKind::Flat, &config.seeds.flat),
            (WorldKind::Regular, &config.seeds.regular),
        ] {
            for &seed in seeds {
                jobs.push((t, kind, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()?;
    let trials: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, kind, seed)| run_trial(config, source, &initial, t, kind, seed))
            .collect()
    });
    let report = UnitTestReport::from_trials(&config.tasks, &trials);
    Ok(UnitRun { trials, report })
}

fn run_trial(
    config: &TrialConfig,
    source: &BackendSource,
    initial: &Option<String>,
    t: Template,
    kind: WorldKind,
    seed: u64,
) -> TrialRecord {
    let agent_config = config.agent_config();
    let mut world = generate_world(seed, kind);
    let mut agent = world.spawn_agent();
    let provisioned: Vec<(String, u32)> = provisioned_inventory(t)
        .iter()
        .map(|(n, c)| (n.to_string(), *c))
        .collect();
    for (item, n) in &provisioned {
        agent.give(item, *n).expect("provisioned items are known");
    }
    let mut skills = library_from(initial);
    let mut history = History::default();
    let mut record = TrialRecord {
        id: format!("{}_{}_{}", t.name(), kind.name(), seed),
        experiment: Experiment::UnitTests,
        world_kind: kind,
        seed,
        template: Some(t.name().to_owned()),
        provisioned,
        agent_config: agent_config.clone(),
        backend: String::new(),
        initial_skills: initial.clone(),
        iterations: Vec::new(),
        oracle: Vec::new(),
        held: Vec::new(),
        aborted: Vec::new(),
        end: RunEnd::Completed,
        items_seen: Vec::new(),
        skills: String::new(),
    };
    let mut backend = match source.unit_backend(t, kind) {
        Ok(b) => b,
        Err(e) => {
            record.end = RunEnd::Incomplete(e);
            record.skills = skills.to_json();
            return record;
        }
    };
    record.backend = backend.identity();
    let result = Session {
        world: &mut world,
        agent: &mut agent,
        config: &agent_config,
        backend: &mut *backend,
        skills: &mut skills,
        history: &mut history,
    }
    .run_iteration(1, Some(unit_task(t)));
    match result {
        Ok(rec) => {
            record.oracle.push(Some(judge_template(t, &rec.diff, &world)));
            record.held.push(held_items(&agent));
            record.iterations.push(rec);
        }
        Err(e) => record.end = RunEnd::Incomplete(e.to_string()),
    }
    record.items_seen = agent.items_seen.iter().cloned().collect();
    record.skills = skills.to_json();
    record
}
