use voxagent_core::agents::{AgentError, BackendError, History, Session};
use voxagent_core::world::{generate_world, AgentState, VoxelWorld};

use super::report::{BuildingReport, ResourceReport};
use super::{
    held_items, is_building_task, judge_building, library_from, load_initial_skills, BackendSource, RunEnd, TrialRecord,
};
use crate::config::{Experiment, TrialConfig};

pub struct OpenRun {
    pub trial: TrialRecord,
    pub world: VoxelWorld,
    pub agent: AgentState,
    pub resources: Option<ResourceReport>,
    pub building: Option<BuildingReport>,
}

impl OpenRun {
    pub fn complete(&self) -> bool {
        self.trial.end.is_complete()
    }
}

/// The curriculum-driven loop on one world, up to the configured number of
/// iterations.
pub fn run_open_ended(config: &TrialConfig, source: &BackendSource) -> anyhow::Result<OpenRun> {
    let experiment = config.experiment;
    anyhow::ensure!(
        experiment != Experiment::UnitTests,
        "unit tests are not an open-ended experiment"
    );
    let initial = load_initial_skills(config)?;
    let kind = config.world_kind;
    let seed = config.open_seed();
    let agent_config = config.agent_config();
    let mut world = generate_world(seed, kind);
    let mut agent = world.spawn_agent();
    let mut skills = library_from(&initial);
    let mut history = History::default();
    let mut trial = TrialRecord {
        id: format!("{}_{}_{}", experiment.name(), kind.name(), seed),
        experiment,
        world_kind: kind,
        seed,
        template: None,
        provisioned: Vec::new(),
        agent_config: agent_config.clone(),
        backend: String::new(),
        initial_skills: initial,
        iterations: Vec::new(),
        oracle: Vec::new(),
        held: Vec::new(),
        aborted: Vec::new(),
        end: RunEnd::Completed,
        items_seen: Vec::new(),
        skills: String::new(),
    };
    match source.open_backend() {
        Err(e) => trial.end = RunEnd::Incomplete(e),
        Ok(mut backend) => {
            trial.backend = backend.identity();
            for i in 1..=config.iterations() {
                let result = Session {
                    world: &mut world,
                    agent: &mut agent,
                    config: &agent_config,
                    backend: &mut *backend,
                    skills: &mut skills,
                    history: &mut history,
                }
                .run_iteration(i, None);
                match result {
                    Ok(rec) => {
                        let oracle = (experiment == Experiment::Building && is_building_task(&rec.task))
                            .then(|| judge_building(&rec, &world));
                        trial.oracle.push(oracle);
                        trial.held.push(held_items(&agent));
                        trial.iterations.push(rec);
                    }
                    Err(AgentError::Backend(BackendError::ScriptExhausted { role: "curriculum", .. })) => {
                        trial.end = RunEnd::ScriptEnded;
                        break;
                    }
                    Err(AgentError::MalformedProposal(e)) => trial.aborted.push((i, e)),
                    Err(e) => {
                        trial.end = RunEnd::Incomplete(format!("iteration {i}: {e}"));
                        break;
                    }
                }
            }
        }
    }
    trial.items_seen = agent.items_seen.iter().cloned().collect();
    trial.skills = skills.to_json();
    let (resources, building) = match experiment {
        Experiment::Resources => (Some(ResourceReport::from_trial(&trial)), None),
        _ => (None, Some(BuildingReport::from_trial(&trial))),
    };
    Ok(OpenRun {
        trial,
        world,
        agent,
        resources,
        building,
    })
}
