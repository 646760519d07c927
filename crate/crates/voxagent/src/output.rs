//! Writes a finished run to disk.
//!
//! ```text
//! <out>/run_<id>/
//!     config.json        effective configuration
//!     report.md          human-readable tables
//!     report.json        the same numbers, machine-readable
//!     report.csv         one row per unit-test trial (unit tests only)
//!     transcript.jsonl   one line per model call
//!     records.json       everything `replay` needs
//!     <trial>/skills.json
//!     <trial>/iter_<n>_r<k>_<role>.ppm   (and .png when asked for)
//!     <trial>/world.json                 final world (open-ended runs)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use voxagent_core::agents::{parse_verdict, AgentRole, IterationRecord};
use voxagent_core::perception::{encode_ppm, Image};

use crate::backend::png_bytes;
use crate::config::TrialConfig;
use crate::harness::{OpenRun, TrialRecord, UnitRun};
use crate::snapshot;

pub fn run_dir(out: &Path, id: &str) -> PathBuf {
    out.join(format!("run_{id}"))
}

fn screenshot_name(iteration: u32, round: u32, role: AgentRole) -> String {
    match role {
        AgentRole::Curriculum => format!("iter_{iteration}_curriculum"),
        _ => format!("iter_{iteration}_r{round}_{}", role.name()),
    }
}

/// The image a call was shown, if any.
fn image_for(rec: &IterationRecord, round: u32, role: AgentRole) -> Option<&Image> {
    match role {
        AgentRole::Curriculum => rec.curriculum_image.as_ref(),
        AgentRole::Action => rec.rounds.iter().find(|r| r.round == round)?.pre_image.as_ref(),
        AgentRole::Critic => rec.rounds.iter().find(|r| r.round == round)?.post_image.as_ref(),
    }
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> anyhow::Result<()> {
    // Through Value so that object keys come out sorted.
    let v = serde_json::to_value(v)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Screenshots and skills of one trial; returns its transcript lines.
fn write_trial(dir: &Path, t: &TrialRecord, png: bool) -> anyhow::Result<Vec<String>> {
    let tdir = dir.join(&t.id);
    fs::create_dir_all(&tdir)?;
    fs::write(tdir.join("skills.json"), &t.skills)?;
    let mut lines = Vec::new();
    for rec in &t.iterations {
        for call in &rec.calls {
            let mut shot = Value::Null;
            if let Some(img) = image_for(rec, call.round, call.role) {
                let name = screenshot_name(rec.iteration, call.round, call.role);
                let ppm = tdir.join(format!("{name}.ppm"));
                if !ppm.exists() {
                    fs::write(&ppm, encode_ppm(img))?;
                    if png {
                        fs::write(tdir.join(format!("{name}.png")), png_bytes(img))?;
                    }
                }
                shot = Value::String(format!("{}/{name}.ppm", t.id));
            }
            let verdict = match call.role {
                AgentRole::Critic => parse_verdict(&call.response)
                    .ok()
                    .map_or(Value::Null, |v| serde_json::to_value(v).expect("verdict serializes")),
                _ => Value::Null,
            };
            let event = json!({
                "trial": t.id,
                "iteration": rec.iteration,
                "round": call.round,
                "attempt": call.attempt,
                "role": call.role.name(),
                "prompt_hash": format!("{:016x}", call.prompt_hash),
                "response": call.response,
                "verdict": verdict,
                "screenshot": shot,
            });
            lines.push(serde_json::to_string(&event)?);
        }
    }
    Ok(lines)
}

fn write_common(dir: &Path, config: &TrialConfig, trials: &[TrialRecord]) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), config.to_json() + "\n")?;
    let mut transcript = String::new();
    for t in trials {
        for line in write_trial(dir, t, config.png)? {
            transcript += &line;
            transcript.push('\n');
        }
    }
    fs::write(dir.join("transcript.jsonl"), transcript)?;
    write_json(&dir.join("records.json"), &trials)?;
    Ok(())
}

pub fn write_unit_run(config: &TrialConfig, run: &UnitRun) -> anyhow::Result<PathBuf> {
    let dir = run_dir(&config.out_dir, "unit_tests");
    write_common(&dir, config, &run.trials)?;
    fs::write(dir.join("report.md"), run.report.render(true))?;
    fs::write(dir.join("report.csv"), run.report.to_csv())?;
    write_json(&dir.join("report.json"), &run.report)?;
    Ok(dir)
}

pub fn write_open_run(config: &TrialConfig, run: &OpenRun) -> anyhow::Result<PathBuf> {
    let dir = run_dir(&config.out_dir, &run.trial.id);
    write_common(&dir, config, std::slice::from_ref(&run.trial))?;
    snapshot::save(&dir.join(&run.trial.id).join("world.json"), &run.world, &run.agent)?;
    let (md, json) = match (&run.resources, &run.building) {
        (Some(r), _) => (r.render(true), serde_json::to_value(r)?),
        (_, Some(b)) => (b.render(true), serde_json::to_value(b)?),
        _ => (String::new(), Value::Null),
    };
    let report = json!({
        "end": run.trial.end,
        "aborted": run.trial.aborted,
        "iterations": run.trial.iterations.len(),
        "report": json,
    });
    fs::write(dir.join("report.md"), md)?;
    write_json(&dir.join("report.json"), &report)?;
    Ok(dir)
}

/// Reads the trials written to `records.json`.
pub fn read_records(path: &Path) -> anyhow::Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("bad records file {}: {e}", path.display()))
}
