//! Seeded terrain: superflat and value-noise heightmaps, ore veins, water
//! basins and trees.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::block::BlockId;
use crate::geom::Pos;
use crate::hash::{lattice, unit};

pub const HALF_EXTENT: i32 = 128;
pub const MAX_Y: i32 = 64;
pub const FLAT_GROUND: i32 = 4;
pub const WATER_LEVEL: i32 = 6;
pub const BASE_HEIGHT: f64 = 13.0;
pub const AMPLITUDE: f64 = 11.0;
pub const MIN_HEIGHT: i32 = 2;
pub const MAX_HEIGHT: i32 = 24;
/// Trees are placed one per `TREE_CELL x TREE_CELL` block of columns.
pub const TREE_CELL: i32 = 14;

const SALT_OCTAVE_A: u64 = 1;
const SALT_OCTAVE_B: u64 = 2;
const SALT_BIOME: u64 = 3;
const SALT_TREE: u64 = 4;
const SALT_ORE: u64 = 5;
const SALT_ORE_FILL: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldKind {
    Flat,
    Regular,
}

impl WorldKind {
    pub fn name(self) -> &'static str {
        match self {
            WorldKind::Flat => "flat",
            WorldKind::Regular => "regular",
        }
    }

    pub fn from_name(s: &str) -> Option<WorldKind> {
        match s {
            "flat" => Some(WorldKind::Flat),
            "regular" => Some(WorldKind::Regular),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Biome {
    Plains,
    Forest,
    Taiga,
    Hills,
    River,
}

impl Biome {
    pub fn name(self) -> &'static str {
        match self {
            Biome::Plains => "plains",
            Biome::Forest => "forest",
            Biome::Taiga => "taiga",
            Biome::Hills => "hills",
            Biome::River => "river",
        }
    }
}

/// The immutable generated part of a world. Edits live in `VoxelWorld`.
#[derive(Debug)]
pub struct Terrain {
    pub seed: u64,
    pub kind: WorldKind,
    heights: Vec<i16>,
    biomes: Vec<Biome>,
    /// Tree blocks above the surface.
    features: BTreeMap<Pos, BlockId>,
    /// Columns touched by a tree (trunk or leaves).
    feature_columns: Vec<bool>,
    pub spawn: Pos,
}

const SIDE: usize = (2 * HALF_EXTENT + 1) as usize;

fn in_columns(x: i32, z: i32) -> bool {
    (-HALF_EXTENT..=HALF_EXTENT).contains(&x) && (-HALF_EXTENT..=HALF_EXTENT).contains(&z)
}

fn column_index(x: i32, z: i32) -> usize {
    (x + HALF_EXTENT) as usize * SIDE + (z + HALF_EXTENT) as usize
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise in `[0, 1)` with lattice period `period`.
pub fn value_noise(seed: u64, salt: u64, x: i32, z: i32, period: i32) -> f64 {
    let gx = x.div_euclid(period);
    let gz = z.div_euclid(period);
    let tx = smoothstep(x.rem_euclid(period) as f64 / period as f64);
    let tz = smoothstep(z.rem_euclid(period) as f64 / period as f64);
    let v = |i: i32, k: i32| unit(lattice(seed, salt, gx + i, 0, gz + k));
    let a = v(0, 0) + (v(1, 0) - v(0, 0)) * tx;
    let b = v(0, 1) + (v(1, 1) - v(0, 1)) * tx;
    a + (b - a) * tz
}

/// Two-octave terrain height for a regular-world column.
pub fn regular_height(seed: u64, x: i32, z: i32) -> i32 {
    let n = value_noise(seed, SALT_OCTAVE_A, x, z, 32) * (2.0 / 3.0)
        + value_noise(seed, SALT_OCTAVE_B, x, z, 16) * (1.0 / 3.0);
    let h = BASE_HEIGHT + AMPLITUDE * (2.0 * n - 1.0);
    (libm::round(h) as i32).clamp(MIN_HEIGHT, MAX_HEIGHT)
}

impl Terrain {
    pub fn generate(seed: u64, kind: WorldKind) -> Terrain {
        let mut heights = vec![0i16; SIDE * SIDE];
        let mut biomes = vec![Biome::Plains; SIDE * SIDE];
        for x in -HALF_EXTENT..=HALF_EXTENT {
            for z in -HALF_EXTENT..=HALF_EXTENT {
                let i = column_index(x, z);
                match kind {
                    WorldKind::Flat => {
                        heights[i] = FLAT_GROUND as i16;
                        biomes[i] = Biome::Plains;
                    }
                    WorldKind::Regular => {
                        let h = regular_height(seed, x, z);
                        heights[i] = h as i16;
                        biomes[i] = if h <= WATER_LEVEL {
                            Biome::River
                        } else if h >= 19 {
                            Biome::Hills
                        } else {
                            let b = value_noise(seed, SALT_BIOME, x, z, 64);
                            if b < 0.3 {
                                Biome::Taiga
                            } else if b < 0.6 {
                                Biome::Plains
                            } else {
                                Biome::Forest
                            }
                        };
                    }
                }
            }
        }
        let mut t = Terrain {
            seed,
            kind,
            heights,
            biomes,
            features: BTreeMap::new(),
            feature_columns: vec![false; SIDE * SIDE],
            spawn: Pos::ORIGIN,
        };
        t.plant_trees();
        t.spawn = t.find_spawn();
        t
    }

    pub fn height(&self, x: i32, z: i32) -> Option<i32> {
        in_columns(x, z).then(|| self.heights[column_index(x, z)] as i32)
    }

    pub fn biome(&self, x: i32, z: i32) -> Biome {
        if in_columns(x, z) {
            self.biomes[column_index(x, z)]
        } else {
            Biome::Plains
        }
    }

    pub fn has_feature_column(&self, x: i32, z: i32) -> bool {
        in_columns(x, z) && self.feature_columns[column_index(x, z)]
    }

    pub fn features(&self) -> impl Iterator<Item = (Pos, BlockId)> + '_ {
        self.features.iter().map(|(p, b)| (*p, *b))
    }

    fn surface_is_grass(&self, x: i32, z: i32) -> bool {
        match self.height(x, z) {
            Some(h) => self.kind == WorldKind::Flat || h > WATER_LEVEL,
            None => false,
        }
    }

    fn plant_trees(&mut self) {
        let cells = (2 * HALF_EXTENT) / TREE_CELL + 1;
        let lo = -HALF_EXTENT;
        for cx in 0..cells {
            for cz in 0..cells {
                let h = lattice(self.seed, SALT_TREE, cx, 0, cz);
                let ox = 2 + (h % (TREE_CELL as u64 - 4)) as i32;
                let oz = 2 + ((h >> 8) % (TREE_CELL as u64 - 4)) as i32;
                let trunk = 4 + ((h >> 16) % 3) as i32;
                let x = lo + cx * TREE_CELL + ox;
                let z = lo + cz * TREE_CELL + oz;
                if !in_columns(x + 2, z + 2) || !in_columns(x - 2, z - 2) {
                    continue;
                }
                if !self.surface_is_grass(x, z) {
                    continue;
                }
                let biome = self.biome(x, z);
                if biome == Biome::Hills && (h >> 24) % 2 == 0 {
                    continue;
                }
                let (log, leaves) = match biome {
                    Biome::Taiga => (BlockId::SpruceLog, BlockId::OakLeaves),
                    _ => (BlockId::OakLog, BlockId::OakLeaves),
                };
                let ground = self.height(x, z).unwrap_or(FLAT_GROUND);
                let top = ground + trunk;
                for y in ground + 1..=top {
                    self.features.insert(Pos::new(x, y, z), log);
                }
                for y in top - 2..=top + 1 {
                    let r: i32 = if y >= top { 1 } else { 2 };
                    for dx in -r..=r {
                        for dz in -r..=r {
                            if dx == 0 && dz == 0 && y <= top {
                                continue;
                            }
                            if r == 2 && dx.abs() == 2 && dz.abs() == 2 {
                                continue;
                            }
                            let p = Pos::new(x + dx, y, z + dz);
                            let below_ground = self.height(p.x, p.z).map_or(true, |g| y <= g);
                            if below_ground {
                                continue;
                            }
                            self.features.entry(p).or_insert(leaves);
                        }
                    }
                }
                for dx in -2..=2 {
                    for dz in -2..=2 {
                        self.feature_columns[column_index(x + dx, z + dz)] = true;
                    }
                }
            }
        }
    }

    fn site_is_clear(&self, x: i32, z: i32, h0: i32) -> bool {
        for dx in -5..=10 {
            for dz in -5..=5 {
                let (cx, cz) = (x + dx, z + dz);
                if !in_columns(cx, cz) || self.has_feature_column(cx, cz) {
                    return false;
                }
                let h = self.height(cx, cz).unwrap_or(0);
                if (h - h0).abs() > 1 || !self.surface_is_grass(cx, cz) {
                    return false;
                }
            }
        }
        true
    }

    /// Feet cell of the spawn point: the column nearest the origin (by ring,
    /// then lexicographically) whose surroundings are dry, tree-free and
    /// level within one block.
    fn find_spawn(&self) -> Pos {
        for r in 0..HALF_EXTENT - 12 {
            let mut ring: Vec<(i32, i32)> = Vec::new();
            for x in -r..=r {
                for z in -r..=r {
                    if x.abs() == r || z.abs() == r {
                        ring.push((x, z));
                    }
                }
            }
            for (x, z) in ring {
                let h0 = match self.height(x, z) {
                    Some(h) => h,
                    None => continue,
                };
                if self.site_is_clear(x, z, h0) {
                    return Pos::new(x, h0 + 1, z);
                }
            }
        }
        let h = self.height(0, 0).unwrap_or(FLAT_GROUND);
        Pos::new(0, h + 1, 0)
    }

    /// The generated block at `p`, before any edits.
    pub fn block(&self, p: Pos) -> BlockId {
        if p.y <= 0 {
            return BlockId::Bedrock;
        }
        if p.y > MAX_Y || !in_columns(p.x, p.z) {
            return BlockId::Air;
        }
        let h = self.heights[column_index(p.x, p.z)] as i32;
        if p.y > h {
            if let Some(b) = self.features.get(&p) {
                return *b;
            }
            if self.kind == WorldKind::Regular && p.y <= WATER_LEVEL {
                return BlockId::Water;
            }
            return BlockId::Air;
        }
        match self.kind {
            WorldKind::Flat => {
                if p.y == h {
                    BlockId::GrassBlock
                } else {
                    BlockId::Dirt
                }
            }
            WorldKind::Regular => {
                let depth = h - p.y;
                if depth == 0 {
                    if h > WATER_LEVEL {
                        BlockId::GrassBlock
                    } else {
                        BlockId::Dirt
                    }
                } else if depth < 4 {
                    BlockId::Dirt
                } else {
                    self.ore_or_stone(p)
                }
            }
        }
    }

    fn ore_or_stone(&self, p: Pos) -> BlockId {
        let cluster = lattice(
            self.seed,
            SALT_ORE,
            p.x.div_euclid(2),
            p.y.div_euclid(2),
            p.z.div_euclid(2),
        );
        let roll = cluster % 1000;
        let fill = unit(lattice(self.seed, SALT_ORE_FILL, p.x, p.y, p.z)) < 0.6;
        if roll < 40 && fill {
            BlockId::CoalOre
        } else if (40..70).contains(&roll) && p.y <= 20 && fill {
            BlockId::IronOre
        } else {
            BlockId::Stone
        }
    }
}
