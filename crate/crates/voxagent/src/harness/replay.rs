//! Re-executes the programs of a finished run without any model and checks
//! that the world ends up the same. Replies are not needed: the recorded
//! programs and critic verdicts are enough to rebuild the skill library in
//! the same order.

use serde::Serialize;
use voxagent_core::actlang::{self, execute};
use voxagent_core::verify::Template;
use voxagent_core::world::{generate_world, world_diff};

use super::{is_building_task, judge_building, judge_template, library_from, TrialRecord};
use crate::config::Experiment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayTrial {
    pub id: String,
    pub iterations: usize,
    pub rounds: usize,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub trials: Vec<ReplayTrial>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.trials.iter().all(|t| t.mismatches.is_empty())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            let status = if t.mismatches.is_empty() { "ok" } else { "MISMATCH" };
            out += &format!(
                "{} {}: {} iterations, {} programs\n",
                status, t.id, t.iterations, t.rounds
            );
            for m in &t.mismatches {
                out += &format!("    {m}\n");
            }
        }
        out
    }
}

pub fn replay(trials: &[TrialRecord]) -> ReplayReport {
    ReplayReport {
        trials: trials.iter().map(replay_trial).collect(),
    }
}

fn replay_trial(t: &TrialRecord) -> ReplayTrial {
    let mut out = ReplayTrial {
        id: t.id.clone(),
        iterations: t.iterations.len(),
        rounds: 0,
        mismatches: Vec::new(),
    };
    let mut world = generate_world(t.seed, t.world_kind);
    let mut agent = world.spawn_agent();
    for (item, n) in &t.provisioned {
        if let Err(e) = agent.give(item, *n) {
            out.mismatches.push(format!("cannot provision {item}: {e}"));
            return out;
        }
    }
    let mut skills = library_from(&t.initial_skills);
    let limits = t.agent_config.exec_limits();
    let template = t.template.as_deref().and_then(Template::from_name);
    for (k, rec) in t.iterations.iter().enumerate() {
        let before = world.clone();
        for round in &rec.rounds {
            let Some(src) = &round.program else { continue };
            out.rounds += 1;
            let program = match actlang::parse(src) {
                Ok(p) => skills.link(&p),
                Err(e) => {
                    out.mismatches
                        .push(format!("iteration {} round {}: {e}", rec.iteration, round.round));
                    continue;
                }
            };
            let result = execute(&program, &mut world, &mut agent, &limits);
            if result.error_text() != round.error {
                out.mismatches.push(format!(
                    "iteration {} round {}: error {:?}, recorded {:?}",
                    rec.iteration,
                    round.round,
                    result.error_text(),
                    round.error
                ));
            }
            if round.verdict.as_ref().is_some_and(|v| v.success) {
                let _ = skills.add_skill(&rec.task, src, rec.iteration);
            }
        }
        match world_diff(&before, &world) {
            Ok(d) if d == rec.diff => {}
            Ok(d) => out.mismatches.push(format!(
                "iteration {}: diff has +{} -{} cells, recorded +{} -{}",
                rec.iteration,
                d.added.len(),
                d.removed.len(),
                rec.diff.added.len(),
                rec.diff.removed.len()
            )),
            Err(e) => out.mismatches.push(format!("iteration {}: {e}", rec.iteration)),
        }
        if agent.inventory.render() != rec.inventory {
            out.mismatches
                .push(format!("iteration {}: inventory differs", rec.iteration));
        }
        let oracle = match (template, t.experiment) {
            (Some(tp), _) => Some(judge_template(tp, &rec.diff, &world)),
            (None, Experiment::Building) if is_building_task(&rec.task) => Some(judge_building(rec, &world)),
            _ => None,
        };
        if t.oracle.get(k) != Some(&oracle) {
            out.mismatches
                .push(format!("iteration {}: oracle verdict differs", rec.iteration));
        }
    }
    out
}
