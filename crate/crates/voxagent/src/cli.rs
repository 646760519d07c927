//! Command-line entry point. `run` returns the process exit code: 0 on
//! success, 1 on a usage or input error, 2 when an experiment could not
//! finish (or a replay does not match).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use voxagent_core::actlang::{self, execute};
use voxagent_core::perception::{capture_pov, encode_ppm};
use voxagent_core::skills::SkillLibrary;
use voxagent_core::verify::{shape_signature, verify_structure, Template};
use voxagent_core::world::{generate_world, world_diff, WorldKind};

use crate::config::{parse_kind, Experiment, Overrides, TrialConfig};
use crate::harness::{self, BackendSource};
use crate::{output, snapshot};

#[derive(Debug, Parser)]
#[command(
    name = "voxagent",
    version,
    about = "Voxel building-agent simulator and experiment harness"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags accepted both before and after the subcommand name; the later
/// one wins.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Experiment configuration file (JSON)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// World seed (unit tests: one flat and one regular world with this seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for run artifacts
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit
    #[arg(long)]
    pub print_config: bool,
}

impl Common {
    fn merged(&self, later: &Common) -> Common {
        Common {
            config: later.config.clone().or_else(|| self.config.clone()),
            seed: later.seed.or(self.seed),
            out: later.out.clone().or_else(|| self.out.clone()),
            print_config: self.print_config || later.print_config,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the five structure unit tests on flat and regular worlds
    UnitTests(ExperimentArgs),
    /// Open-ended run scored by tool milestones and unique items
    Resources(ExperimentArgs),
    /// Open-ended run scored by verified and unique structures
    Building(ExperimentArgs),
    /// Render the agent's view of a world snapshot to a PPM file
    Render {
        /// World snapshot (default: freshly generated from --seed/--world-kind)
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind, default_value = "regular")]
        world_kind: WorldKind,
        /// World seed when no snapshot is given (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Override the agent's yaw (degrees)
        #[arg(long, allow_hyphen_values = true)]
        yaw: Option<f64>,
        /// Override the agent's pitch (degrees)
        #[arg(long, allow_hyphen_values = true)]
        pitch: Option<f64>,
        #[arg(long, default_value_t = voxagent_core::perception::DEFAULT_WIDTH)]
        width: u32,
        #[arg(long, default_value_t = voxagent_core::perception::DEFAULT_HEIGHT)]
        height: u32,
        /// Output file; `.png` writes PNG, anything else PPM
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a program against a world snapshot
    DslRun {
        /// Program source file
        file: PathBuf,
        /// World snapshot (default: freshly generated from --seed/--world-kind)
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind, default_value = "regular")]
        world_kind: WorldKind,
        /// World seed when no snapshot is given (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Skill library whose functions the program may call
        #[arg(long)]
        skills: Option<PathBuf>,
        /// Items to give the agent first, e.g. oak_planks=64
        #[arg(long = "give", value_parser = parse_give)]
        give: Vec<(String, u32)>,
        /// Step budget
        #[arg(long)]
        max_steps: Option<u64>,
        /// Write the resulting world here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a build between two snapshots against a structure template
    Verify {
        #[arg(long)]
        template: String,
        #[arg(long)]
        before: PathBuf,
        #[arg(long)]
        after: PathBuf,
    },
    /// List the skills in a skill library
    InspectSkills {
        path: PathBuf,
        /// Also print each skill's source
        #[arg(long)]
        source: bool,
    },
    /// Re-execute a finished run's programs and compare the outcome
    Replay {
        /// A run directory or its records.json
        path: PathBuf,
    },
}

fn parse_give(s: &str) -> Result<(String, u32), String> {
    let (item, n) = s
        .split_once('=')
        .ok_or_else(|| format!("expected ITEM=COUNT, got {s:?}"))?;
    let n = n.parse().map_err(|_| format!("bad count in {s:?}"))?;
    Ok((item.to_owned(), n))
}

/// Config file, then flag overrides, then the global flags.
pub fn resolve(experiment: Experiment, common: &Common, overrides: &Overrides) -> anyhow::Result<TrialConfig> {
    let mut c = match &common.config {
        Some(p) => TrialConfig::load(p)?,
        None => TrialConfig::default(),
    };
    c.experiment = experiment;
    overrides.apply(&mut c);
    if let Some(seed) = common.seed {
        match experiment {
            Experiment::UnitTests => {
                c.seeds.flat = vec![seed];
                c.seeds.regular = vec![seed];
            }
            _ => c.seed = Some(seed),
        }
    }
    if let Some(out) = &common.out {
        c.out_dir = out.clone();
    }
    c.validate()?;
    Ok(c)
}

enum Failure {
    Usage(anyhow::Error),
    Partial(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
        Err(Failure::Partial(msg)) => {
            let _ = writeln!(err, "incomplete: {msg}");
            2
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let (experiment, args) = match &cli.command {
        Command::UnitTests(a) => (Experiment::UnitTests, a),
        Command::Resources(a) => (Experiment::Resources, a),
        Command::Building(a) => (Experiment::Building, a),
        other => return tool(other, &cli.global, out),
    };
    let common = cli.global.merged(&args.common);
    let config = resolve(experiment, &common, &args.overrides)?;
    if common.print_config {
        writeln!(out, "{}", config.to_json())?;
        return Ok(());
    }
    let source = BackendSource::from_config(&config)?;
    match experiment {
        Experiment::UnitTests => {
            let run = harness::run_unit_tests(&config, &source)?;
            let dir = output::write_unit_run(&config, &run)?;
            write!(out, "{}", run.report.render(true))?;
            writeln!(err, "wrote {}", dir.display())?;
            if !run.complete() {
                let failed: Vec<String> = run
                    .trials
                    .iter()
                    .filter_map(|t| match &t.end {
                        harness::RunEnd::Incomplete(e) => Some(format!("{}: {e}", t.id)),
                        _ => None,
                    })
                    .collect();
                return Err(Failure::Partial(failed.join("; ")));
            }
        }
        _ => {
            let run = harness::run_open_ended(&config, &source)?;
            let dir = output::write_open_run(&config, &run)?;
            if let Some(r) = &run.resources {
                write!(out, "{}", r.render(true))?;
            }
            if let Some(b) = &run.building {
                write!(out, "{}", b.render(true))?;
            }
            writeln!(err, "wrote {}", dir.display())?;
            if let harness::RunEnd::Incomplete(e) = &run.trial.end {
                return Err(Failure::Partial(e.clone()));
            }
        }
    }
    Ok(())
}

fn load_world(path: &Option<PathBuf>, seed: u64, kind: WorldKind) -> Result<snapshot::Snapshot, Failure> {
    Ok(match path {
        Some(p) => snapshot::load(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?,
        None => {
            let world = generate_world(seed, kind);
            let agent = world.spawn_agent();
            snapshot::Snapshot { world, agent }
        }
    })
}

fn tool(cmd: &Command, global: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Render {
            snapshot,
            world_kind,
            seed,
            yaw,
            pitch,
            width,
            height,
            out: path,
        } => {
            if *width < 16 || *height < 16 {
                return Err(Failure::Usage(anyhow::anyhow!("the image must be at least 16x16")));
            }
            let mut s = load_world(snapshot, seed.or(global.seed).unwrap_or(0), *world_kind)?;
            if let Some(y) = yaw {
                s.agent.yaw = *y;
            }
            if let Some(p) = pitch {
                s.agent.pitch = *p;
            }
            let img = capture_pov(&s.world, &s.agent, *width, *height);
            let bytes = match path.extension().and_then(|e| e.to_str()) {
                Some("png") => crate::backend::png_bytes(&img),
                _ => encode_ppm(&img),
            };
            std::fs::write(path, bytes)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::DslRun {
            file,
            snapshot,
            world_kind,
            seed,
            skills,
            give,
            max_steps,
            out: save,
        } => {
            let src = std::fs::read_to_string(file).map_err(|e| anyhow::anyhow!("{}: {e}", file.display()))?;
            let lib = match skills {
                Some(p) => SkillLibrary::from_json(&std::fs::read_to_string(p)?)?,
                None => SkillLibrary::default(),
            };
            let program = lib.link(&actlang::parse(&src)?);
            actlang::check(&program)?;
            let mut s = load_world(snapshot, seed.or(global.seed).unwrap_or(0), *world_kind)?;
            for (item, n) in give {
                s.agent.give(item, *n)?;
            }
            let mut limits = actlang::ExecLimits::default();
            if let Some(m) = max_steps {
                limits.max_steps = *m;
            }
            let before = s.world.clone();
            let r = execute(&program, &mut s.world, &mut s.agent, &limits);
            let diff = world_diff(&before, &s.world)?;
            for line in &r.chat_log {
                writeln!(out, "chat: {line}")?;
            }
            writeln!(out, "status: {}", r.error_text().unwrap_or_else(|| "ok".into()))?;
            writeln!(out, "steps: {}", r.steps_used)?;
            writeln!(out, "blocks: +{} -{}", diff.added.len(), diff.removed.len())?;
            writeln!(out, "inventory: {}", s.agent.inventory.render())?;
            if let Some(p) = save {
                snapshot::save(p, &s.world, &s.agent)?;
            }
            if !r.is_ok() {
                return Err(Failure::Partial(String::from("the program stopped with an error")));
            }
        }
        Command::Verify {
            template,
            before,
            after,
        } => {
            let t = Template::from_name(template).ok_or_else(|| anyhow::anyhow!("unknown template {template:?}"))?;
            let a = snapshot::load(before).map_err(|e| anyhow::anyhow!("{}: {e}", before.display()))?;
            let b = snapshot::load(after).map_err(|e| anyhow::anyhow!("{}: {e}", after.display()))?;
            let diff = world_diff(&a.world, &b.world)?;
            let report = verify_structure(t, &diff, &b.world);
            let v = json!({
                "template": t.name(),
                "success": report.success,
                "reason": report.reason,
                "matched_at": report.matched_at,
                "signature": shape_signature(&diff).ok().map(|s| format!("{s:016x}")),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
        Command::InspectSkills { path, source } => {
            let lib = SkillLibrary::from_json(&std::fs::read_to_string(path)?)?;
            for skill in &lib.skills {
                writeln!(out, "{} (iteration {})", skill.name, skill.created_at_iteration)?;
                writeln!(out, "    {}", skill.description)?;
                if *source {
                    for line in skill.source.lines() {
                        writeln!(out, "    | {line}")?;
                    }
                }
            }
            writeln!(out, "{} skills", lib.len())?;
        }
        Command::Replay { path } => {
            let file = if path.is_dir() {
                path.join("records.json")
            } else {
                path.clone()
            };
            let trials = output::read_records(&file)?;
            let report = harness::replay(&trials);
            write!(out, "{}", report.render())?;
            if !report.ok() {
                return Err(Failure::Partial(String::from(
                    "the replay does not match the recorded run",
                )));
            }
        }
        Command::UnitTests(_) | Command::Resources(_) | Command::Building(_) => unreachable!("handled by dispatch"),
    }
    Ok(())
}
