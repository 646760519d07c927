//! Deterministic voxel environment.
//!
//! A [`VoxelWorld`] is a generated [`Terrain`] (shared, immutable) plus a
//! sparse map of edits. Two worlds with the same seed and kind and the same
//! edit map are identical; edits equal to the generated block are dropped so
//! the edit map is canonical.

mod agent;
mod block;
mod diff;
mod inventory;
mod ops;
mod tables;
mod terrain;

use alloc::collections::BTreeMap;
use alloc::sync::Arc;

pub use agent::{view_direction, AgentState, EYE_HEIGHT, MAX_HEALTH};
pub use block::{BlockId, UnknownBlock};
pub use diff::{apply_diff, world_diff, WorldDiff};
pub use inventory::{Inventory, InventoryError, ItemStack, DEFAULT_STACK, INVENTORY_SLOTS};
pub use ops::{
    break_block, craft, equip, in_reach, nearby_blocks, place_block, smelt, station_within, time_label, WorldError,
    BREAK_TICKS, CRAFT_TICKS, PLACE_TICKS, REACH, SMELT_TICKS, STATION_RANGE,
};
pub use tables::{tables, BlockEntry, Recipe, Station, Tables, TABLES_FORMAT_VERSION};
pub use terrain::{
    regular_height, value_noise, Biome, Terrain, WorldKind, FLAT_GROUND, HALF_EXTENT, MAX_Y, WATER_LEVEL,
};

use crate::geom::Pos;
use crate::hash::Fnv64;

/// 20 ticks per in-game second; worlds start at noon.
pub const START_TIME: u64 = 6000;

#[derive(Debug, Clone)]
pub struct VoxelWorld {
    terrain: Arc<Terrain>,
    edits: BTreeMap<Pos, BlockId>,
    pub time: u64,
}

impl PartialEq for VoxelWorld {
    fn eq(&self, other: &Self) -> bool {
        self.seed() == other.seed()
            && self.kind() == other.kind()
            && self.edits == other.edits
            && self.time == other.time
    }
}

/// Generates the world for `(seed, kind)`.
pub fn generate_world(seed: u64, kind: WorldKind) -> VoxelWorld {
    VoxelWorld {
        terrain: Arc::new(Terrain::generate(seed, kind)),
        edits: BTreeMap::new(),
        time: START_TIME,
    }
}

/// Whether a cell may be edited: inside the x/z bounds and above bedrock.
pub fn editable(p: Pos) -> bool {
    (-HALF_EXTENT..=HALF_EXTENT).contains(&p.x)
        && (-HALF_EXTENT..=HALF_EXTENT).contains(&p.z)
        && (1..=MAX_Y).contains(&p.y)
}

impl VoxelWorld {
    /// A fresh copy of the generated world sharing this world's terrain.
    pub fn reset(&self) -> VoxelWorld {
        VoxelWorld {
            terrain: self.terrain.clone(),
            edits: BTreeMap::new(),
            time: START_TIME,
        }
    }

    pub fn seed(&self) -> u64 {
        self.terrain.seed
    }

    pub fn kind(&self) -> WorldKind {
        self.terrain.kind
    }

    pub fn terrain(&self) -> &Terrain {
        &self.terrain
    }

    pub fn spawn(&self) -> Pos {
        self.terrain.spawn
    }

    /// A new agent standing at the spawn point with an empty inventory.
    pub fn spawn_agent(&self) -> AgentState {
        AgentState::new(self.spawn())
    }

    pub fn block_at(&self, p: Pos) -> BlockId {
        match self.edits.get(&p) {
            Some(b) => *b,
            None => self.terrain.block(p),
        }
    }

    /// Sets a block, keeping the edit map canonical. Returns `false` for
    /// non-editable cells.
    pub fn set_block(&mut self, p: Pos, b: BlockId) -> bool {
        if !editable(p) {
            return false;
        }
        if self.terrain.block(p) == b {
            self.edits.remove(&p);
        } else {
            self.edits.insert(p, b);
        }
        true
    }

    pub fn edits(&self) -> impl Iterator<Item = (Pos, BlockId)> + '_ {
        self.edits.iter().map(|(p, b)| (*p, *b))
    }

    pub fn edit_count(&self) -> usize {
        self.edits.len()
    }

    pub fn biome_at(&self, p: Pos) -> Biome {
        self.terrain.biome(p.x, p.z)
    }

    /// Fingerprint of the full block state and clock.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(self.seed());
        h.write_u8(self.kind() as u8);
        for (p, b) in &self.edits {
            h.write_i32(p.x);
            h.write_i32(p.y);
            h.write_i32(p.z);
            h.write_u8(*b as u8);
        }
        h.write_u64(self.time);
        h.finish()
    }

    /// Highest non-passable block at or below `y_max` in a column.
    pub fn ground_below(&self, x: i32, z: i32, y_max: i32) -> Option<i32> {
        let mut y = y_max.min(MAX_Y);
        while y >= 0 {
            if !self.block_at(Pos::new(x, y, z)).is_passable() {
                return Some(y);
            }
            y -= 1;
        }
        None
    }

    /// Whether an agent body fits with feet at `p` and something solid below.
    pub fn standable(&self, p: Pos) -> bool {
        self.block_at(p).is_passable()
            && self.block_at(p + Pos::UP).is_passable()
            && !self.block_at(p + Pos::DOWN).is_passable()
    }
}
