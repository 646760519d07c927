use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::block::BlockId;
use super::ops::WorldError;
use super::VoxelWorld;
use crate::geom::Pos;

/// Block changes between two states of the same world. Both lists are sorted
/// by position; a replaced block appears in both.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldDiff {
    pub added: Vec<(Pos, BlockId)>,
    pub removed: Vec<(Pos, BlockId)>,
}

impl WorldDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

/// Minimal diff from `before` to `after`.
pub fn world_diff(before: &VoxelWorld, after: &VoxelWorld) -> Result<WorldDiff, WorldError> {
    if before.seed() != after.seed() || before.kind() != after.kind() {
        return Err(WorldError::SeedMismatch);
    }
    let positions: BTreeSet<Pos> = before
        .edits()
        .map(|(p, _)| p)
        .chain(after.edits().map(|(p, _)| p))
        .collect();
    let mut diff = WorldDiff::default();
    for p in positions {
        let b = before.block_at(p);
        let a = after.block_at(p);
        if a == b {
            continue;
        }
        if !b.is_air() {
            diff.removed.push((p, b));
        }
        if !a.is_air() {
            diff.added.push((p, a));
        }
    }
    Ok(diff)
}

/// Applies `diff` to `world` in place.
pub fn apply_diff(world: &mut VoxelWorld, diff: &WorldDiff) {
    for (p, _) in &diff.removed {
        world.set_block(*p, BlockId::Air);
    }
    for (p, b) in &diff.added {
        world.set_block(*p, *b);
    }
}
