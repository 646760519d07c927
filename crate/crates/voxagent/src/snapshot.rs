//! World snapshot files. The generated terrain is implied by `(seed, kind)`,
//! so only cells that differ from it are stored.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use voxagent_core::world::{generate_world, AgentState, BlockId, VoxelWorld, WorldKind};
use voxagent_core::Pos;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot format_version {0} is not supported (expected {SNAPSHOT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("bad block key {0:?}; expected \"x,y,z\"")]
    BadKey(String),
    #[error("palette index {0} out of range")]
    BadPaletteIndex(usize),
    #[error("unknown block {0:?} in palette")]
    UnknownBlock(String),
    #[error("cell {0} cannot be edited")]
    NotEditable(Pos),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    format_version: u32,
    seed: u64,
    kind: WorldKind,
    palette: Vec<String>,
    blocks: BTreeMap<String, usize>,
    #[serde(default)]
    agent: Option<AgentState>,
    time: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub world: VoxelWorld,
    pub agent: AgentState,
}

pub fn to_json(world: &VoxelWorld, agent: &AgentState) -> String {
    let names: BTreeSet<&'static str> = world.edits().map(|(_, b)| b.name()).collect();
    let palette: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let blocks = world
        .edits()
        .map(|(p, b)| {
            let idx = palette.iter().position(|n| n == b.name()).expect("in palette");
            (format!("{},{},{}", p.x, p.y, p.z), idx)
        })
        .collect();
    let file = SnapshotFile {
        format_version: SNAPSHOT_VERSION,
        seed: world.seed(),
        kind: world.kind(),
        palette,
        blocks,
        agent: Some(agent.clone()),
        time: world.time,
    };
    // Going through Value sorts every object's keys.
    let value = serde_json::to_value(&file).expect("snapshot serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("snapshot serializes");
    s.push('\n');
    s
}

fn parse_key(k: &str) -> Option<Pos> {
    let mut it = k.split(',').map(|v| v.trim().parse::<i32>());
    let p = Pos::new(it.next()?.ok()?, it.next()?.ok()?, it.next()?.ok()?);
    it.next().is_none().then_some(p)
}

pub fn from_json(text: &str) -> Result<Snapshot, SnapshotError> {
    let file: SnapshotFile = serde_json::from_str(text)?;
    if file.format_version != SNAPSHOT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(file.format_version));
    }
    let palette = file
        .palette
        .iter()
        .map(|n| BlockId::from_name(n).ok_or_else(|| SnapshotError::UnknownBlock(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut world = generate_world(file.seed, file.kind);
    for (k, idx) in &file.blocks {
        let p = parse_key(k).ok_or_else(|| SnapshotError::BadKey(k.clone()))?;
        let b = *palette.get(*idx).ok_or(SnapshotError::BadPaletteIndex(*idx))?;
        if !world.set_block(p, b) {
            return Err(SnapshotError::NotEditable(p));
        }
    }
    world.time = file.time;
    let agent = file.agent.unwrap_or_else(|| world.spawn_agent());
    Ok(Snapshot { world, agent })
}

pub fn save(path: &Path, world: &VoxelWorld, agent: &AgentState) -> Result<(), SnapshotError> {
    std::fs::write(path, to_json(world, agent))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot, SnapshotError> {
    from_json(&std::fs::read_to_string(path)?)
}
