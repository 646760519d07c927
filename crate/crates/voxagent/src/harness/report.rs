use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use voxagent_core::world::WorldKind;

use super::{is_building_task, template_for_task, TrialRecord};

/// Successes out of `n` trials. `reported` is the critic's count, `truth`
/// the oracle's.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub reported: u32,
    pub truth: u32,
    pub n: u32,
}

impl Cell {
    fn add(&mut self, o: Cell) {
        self.reported += o.reported;
        self.truth += o.truth;
        self.n += o.n;
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reported == self.truth {
            write!(f, "{}/{}", self.reported, self.n)
        } else {
            write!(f, "{}({})/{}", self.reported, self.truth, self.n)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedCell {
    pub task: String,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    /// One cell per task, then the row total under `"overall"`.
    pub cells: Vec<NamedCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitTrialRow {
    pub task: String,
    pub world_kind: WorldKind,
    pub seed: u64,
    pub reported: bool,
    pub truth: bool,
    pub complete: bool,
}

/// Published unit-test table: rows flat, regular, overall; columns pole,
/// wall, stairs, portal, pyramid, overall.
pub const REFERENCE_UNIT_TABLE: [(&str, [&str; 6]); 3] = [
    ("flat", ["4/5", "2/5", "4/5", "0/5", "3(2)/5", "13(12)/25"]),
    ("regular", ["3/5", "0/5", "2/5", "1/5", "1(0)/5", "7(6)/25"]),
    ("overall", ["7/10", "2/10", "6/10", "1/10", "4(2)/10", "20(18)/50"]),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitTestReport {
    pub rows: Vec<TableRow>,
    pub trials: Vec<UnitTrialRow>,
}

impl UnitTestReport {
    pub fn from_trials(tasks: &[String], trials: &[TrialRecord]) -> UnitTestReport {
        let rows_t: Vec<UnitTrialRow> = trials
            .iter()
            .map(|t| {
                let it = t.iterations.first();
                UnitTrialRow {
                    task: t.template.clone().unwrap_or_default(),
                    world_kind: t.world_kind,
                    seed: t.seed,
                    reported: it.is_some_and(|r| r.success),
                    truth: t.oracle.first().and_then(|o| o.as_ref()).is_some_and(|o| o.success),
                    complete: t.end.is_complete(),
                }
            })
            .collect();
        let row = |label: &str, keep: &dyn Fn(WorldKind) -> bool| {
            let mut total = Cell::default();
            let mut cells: Vec<NamedCell> = tasks
                .iter()
                .map(|task| {
                    let mut c = Cell::default();
                    for r in rows_t.iter().filter(|r| &r.task == task && keep(r.world_kind)) {
                        c.add(Cell {
                            reported: r.reported as u32,
                            truth: r.truth as u32,
                            n: 1,
                        });
                    }
                    total.add(c);
                    NamedCell {
                        task: task.clone(),
                        cell: c,
                    }
                })
                .collect();
            cells.push(NamedCell {
                task: "overall".into(),
                cell: total,
            });
            TableRow {
                label: label.into(),
                cells,
            }
        };
        UnitTestReport {
            rows: vec![
                row("flat", &|k| k == WorldKind::Flat),
                row("regular", &|k| k == WorldKind::Regular),
                row("overall", &|_| true),
            ],
            trials: rows_t,
        }
    }

    pub fn cell(&self, row: &str, task: &str) -> Option<Cell> {
        self.rows
            .iter()
            .find(|r| r.label == row)?
            .cells
            .iter()
            .find(|c| c.task == task)
            .map(|c| c.cell)
    }

    /// Markdown table; `r(t)/n` where the critic and the oracle disagree.
    pub fn render(&self, with_reference: bool) -> String {
        let mut out = String::new();
        let Some(first) = self.rows.first() else {
            return out;
        };
        let heads: Vec<&str> = first.cells.iter().map(|c| c.task.as_str()).collect();
        out += &format!("| world | {} |\n", heads.join(" | "));
        out += &format!("|---|{}\n", "---|".repeat(heads.len()));
        for r in &self.rows {
            let cells: Vec<String> = r.cells.iter().map(|c| c.cell.to_string()).collect();
            out += &format!("| {} | {} |\n", r.label, cells.join(" | "));
        }
        if with_reference && heads == ["pole", "wall", "stairs", "portal", "pyramid", "overall"] {
            out += "\npublished:\n";
            for (label, cells) in REFERENCE_UNIT_TABLE {
                out += &format!("| {label} | {} |\n", cells.join(" | "));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,world_kind,seed,reported,true\n");
        for r in &self.trials {
            out += &format!(
                "{},{},{},{},{}\n",
                r.task,
                r.world_kind.name(),
                r.seed,
                r.reported as u8,
                r.truth as u8
            );
        }
        out
    }
}

/// Iteration at which each pickaxe was first held.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestones {
    pub wooden: Option<u32>,
    pub stone: Option<u32>,
    pub iron: Option<u32>,
}

/// Published iterations for wooden, stone and iron tools of the text-only
/// baseline.
pub const REFERENCE_MILESTONES: [u32; 3] = [6, 11, 21];

/// All published milestone rows: (system, [wooden, stone, iron]).
pub const REFERENCE_MILESTONE_ROWS: [(&str, [u32; 3]); 3] = [
    ("text-only baseline", REFERENCE_MILESTONES),
    ("multimodal model, text prompts", [11, 19, 25]),
    ("multimodal model + screenshots", [9, 19, 27]),
];

fn show(v: Option<u32>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub milestones: Milestones,
    pub unique_items: usize,
    pub items: Vec<String>,
    pub iterations: u32,
}

impl ResourceReport {
    pub fn from_trial(t: &TrialRecord) -> ResourceReport {
        let first = |item: &str| {
            t.iterations
                .iter()
                .zip(&t.held)
                .find(|(_, held)| held.iter().any(|h| h == item))
                .map(|(rec, _)| rec.iteration)
        };
        ResourceReport {
            milestones: Milestones {
                wooden: first("wooden_pickaxe"),
                stone: first("stone_pickaxe"),
                iron: first("iron_pickaxe"),
            },
            unique_items: t.items_seen.len(),
            items: t.items_seen.clone(),
            iterations: t.iterations.len() as u32,
        }
    }

    pub fn render(&self, with_reference: bool) -> String {
        let m = &self.milestones;
        let mut out = String::from("| | wooden | stone | iron |\n|---|---|---|---|\n");
        out += &format!(
            "| this run | {} | {} | {} |\n",
            show(m.wooden),
            show(m.stone),
            show(m.iron)
        );
        if with_reference {
            for (label, [w, s, i]) in REFERENCE_MILESTONE_ROWS {
                out += &format!("| published, {label} | {w} | {s} | {i} |\n");
            }
        }
        out += &format!(
            "\nunique items: {} over {} iterations\n",
            self.unique_items, self.iterations
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildingTask {
    pub iteration: u32,
    pub task: String,
    pub template: Option<String>,
    pub critic: bool,
    pub oracle: bool,
    pub signature: Option<String>,
}

/// Published building results: (world, success %, unique structures).
pub const REFERENCE_BUILDING: [(&str, f64, f64); 3] =
    [("regular", 45.0, 2.67), ("flat", 33.0, 2.83), ("overall", 39.0, 2.75)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingReport {
    pub world_kind: WorldKind,
    pub tasks: Vec<BuildingTask>,
    pub attempts: u32,
    pub reported_successes: u32,
    pub true_successes: u32,
    /// Distinct shapes among oracle-confirmed builds.
    pub unique: u32,
}

impl BuildingReport {
    pub fn from_trial(t: &TrialRecord) -> BuildingReport {
        let tasks: Vec<BuildingTask> = t
            .iterations
            .iter()
            .zip(&t.oracle)
            .filter(|(rec, _)| is_building_task(&rec.task))
            .map(|(rec, o)| BuildingTask {
                iteration: rec.iteration,
                task: rec.task.clone(),
                template: template_for_task(&rec.task).map(|t| t.name().to_owned()),
                critic: rec.success,
                oracle: o.as_ref().is_some_and(|o| o.success),
                signature: o.as_ref().and_then(|o| o.signature.clone()),
            })
            .collect();
        let unique: BTreeSet<&str> = tasks
            .iter()
            .filter(|b| b.oracle)
            .filter_map(|b| b.signature.as_deref())
            .collect();
        BuildingReport {
            world_kind: t.world_kind,
            attempts: tasks.len() as u32,
            reported_successes: tasks.iter().filter(|b| b.critic).count() as u32,
            true_successes: tasks.iter().filter(|b| b.oracle).count() as u32,
            unique: unique.len() as u32,
            tasks,
        }
    }

    fn rate(&self, n: u32) -> Option<f64> {
        (self.attempts > 0).then(|| 100.0 * n as f64 / self.attempts as f64)
    }

    pub fn reported_rate(&self) -> Option<f64> {
        self.rate(self.reported_successes)
    }

    pub fn true_rate(&self) -> Option<f64> {
        self.rate(self.true_successes)
    }

    pub fn render(&self, with_reference: bool) -> String {
        let pct = |r: Option<f64>| r.map_or_else(|| "n/a".into(), |r| format!("{r:.0}%"));
        let mut out = format!(
            "{} world: {} building tasks, success {} reported / {} true, {} unique structures\n",
            self.world_kind.name(),
            self.attempts,
            pct(self.reported_rate()),
            pct(self.true_rate()),
            self.unique
        );
        for b in &self.tasks {
            out += &format!(
                "  iter {:>3}  critic {:<5} oracle {:<5} {}\n",
                b.iteration, b.critic, b.oracle, b.task
            );
        }
        if with_reference {
            out += "published:\n";
            for (w, p, u) in REFERENCE_BUILDING {
                out += &format!("  {w}: {p:.0}% success, {u:.2} unique\n");
            }
        }
        out
    }
}
