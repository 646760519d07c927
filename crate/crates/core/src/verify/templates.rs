use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::Pos;
use crate::world::{BlockId, VoxelWorld, WorldDiff};

/// The five unit-test structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Pole,
    Wall,
    Stairs,
    Portal,
    Pyramid,
}

impl Template {
    pub const ALL: [Template; 5] = [
        Template::Pole,
        Template::Wall,
        Template::Stairs,
        Template::Portal,
        Template::Pyramid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Pole => "pole",
            Template::Wall => "wall",
            Template::Stairs => "stairs",
            Template::Portal => "portal",
            Template::Pyramid => "pyramid",
        }
    }

    pub fn from_name(s: &str) -> Option<Template> {
        Template::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Number of material blocks in a minimal build.
    pub fn block_count(self) -> usize {
        self.shape().required.len()
    }

    pub fn material_name(self) -> &'static str {
        match self {
            Template::Pole | Template::Wall | Template::Stairs => "planks",
            Template::Pyramid => "spruce_planks",
            Template::Portal => "obsidian",
        }
    }

    fn material(self, b: BlockId) -> bool {
        match self {
            Template::Pole | Template::Wall | Template::Stairs => b.is_planks(),
            Template::Pyramid => b == BlockId::SprucePlanks,
            Template::Portal => b == BlockId::Obsidian,
        }
    }

    /// Offsets of the template before rotation; the first horizontal axis
    /// is +x, and the structure lies in the x/y plane unless it is 3D.
    pub fn shape(self) -> Shape {
        let mut s = Shape::default();
        match self {
            Template::Pole => {
                for y in 0..3 {
                    s.required.push(Pos::new(0, y, 0));
                }
                s.ground.push(Pos::new(0, -1, 0));
                s.air.push(Pos::new(0, 3, 0));
            }
            Template::Wall => {
                for u in 0..4 {
                    for y in 0..4 {
                        s.required.push(Pos::new(u, y, 0));
                    }
                    s.ground.push(Pos::new(u, -1, 0));
                }
            }
            Template::Stairs => {
                for (u, h) in [(0, 3), (1, 2), (2, 1)] {
                    for y in 0..h {
                        s.required.push(Pos::new(u, y, 0));
                    }
                    s.ground.push(Pos::new(u, -1, 0));
                }
            }
            Template::Pyramid => {
                for (y, lo, hi) in [(0, 0, 6), (1, 1, 5), (2, 2, 4)] {
                    for x in lo..hi {
                        for z in lo..hi {
                            s.required.push(Pos::new(x, y, z));
                        }
                    }
                }
                for x in 0..6 {
                    for z in 0..6 {
                        s.ground.push(Pos::new(x, -1, z));
                    }
                }
            }
            Template::Portal => {
                for u in 1..3 {
                    s.required.push(Pos::new(u, 0, 0));
                }
                for y in 1..4 {
                    s.required.push(Pos::new(0, y, 0));
                    s.required.push(Pos::new(3, y, 0));
                }
                for u in 1..3 {
                    s.required.push(Pos::new(u, 4, 0));
                }
                for (u, y) in [(0, 0), (3, 0), (0, 4), (3, 4)] {
                    s.optional.push(Pos::new(u, y, 0));
                }
                for u in 1..3 {
                    for y in 1..4 {
                        s.portal.push(Pos::new(u, y, 0));
                    }
                }
            }
        }
        s
    }
}

/// Template offsets by role.
#[derive(Debug, Clone, Default)]
pub struct Shape {
    /// Material blocks that must have been added.
    pub required: Vec<Pos>,
    /// Material blocks that may be present.
    pub optional: Vec<Pos>,
    /// Cells that must be non-air after the build (what it stands on).
    pub ground: Vec<Pos>,
    /// Cells that must be air after the build.
    pub air: Vec<Pos>,
    /// Cells that must be portal blocks after the build.
    pub portal: Vec<Pos>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub success: bool,
    pub reason: String,
    pub matched_at: Option<Pos>,
}

fn rotate(p: Pos, turns: u8) -> Pos {
    (0..turns).fold(p, |q, _| q.rotate_yaw())
}

enum Outcome {
    Match,
    /// Number of required cells present and the first problem found.
    Miss(usize, String),
}

/// Looks for the template among the blocks the build added, at any anchor
/// and quarter turn. Extra material blocks touching a match make it fail,
/// so the build must be exactly the template.
pub fn verify_structure(t: Template, diff: &WorldDiff, after: &VoxelWorld) -> VerifyReport {
    let mats: BTreeSet<Pos> = diff
        .added
        .iter()
        .filter(|(_, b)| t.material(*b))
        .map(|(p, _)| *p)
        .collect();
    if mats.is_empty() {
        return VerifyReport {
            success: false,
            reason: format!("no {} blocks were placed", t.material_name()),
            matched_at: None,
        };
    }
    let shape = t.shape();
    let mut anchors: BTreeSet<(u8, Pos)> = BTreeSet::new();
    for b in &mats {
        for r in 0..4u8 {
            for c in &shape.required {
                anchors.insert((r, *b - rotate(*c, r)));
            }
        }
    }
    let mut best: Option<(usize, String)> = None;
    for (r, a) in &anchors {
        match check_at(t, &shape, &mats, after, *a, *r) {
            Outcome::Match => {
                return VerifyReport {
                    success: true,
                    reason: format!("{} found", t.name()),
                    matched_at: Some(*a),
                }
            }
            Outcome::Miss(n, why) => {
                if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                    best = Some((n, why));
                }
            }
        }
    }
    let (_, reason) = best.expect("at least one anchor");
    VerifyReport {
        success: false,
        reason,
        matched_at: None,
    }
}

fn check_at(t: Template, shape: &Shape, mats: &BTreeSet<Pos>, after: &VoxelWorld, a: Pos, r: u8) -> Outcome {
    let at = |c: &Pos| a + rotate(*c, r);
    let present = shape.required.iter().filter(|c| mats.contains(&at(c))).count();
    if let Some(c) = shape.required.iter().find(|c| !mats.contains(&at(c))) {
        return Outcome::Miss(
            present,
            format!(
                "missing {} at offset ({}, {}, {}) [{}] of the best partial match",
                t.material_name(),
                c.x,
                c.y,
                c.z,
                at(c)
            ),
        );
    }
    for c in &shape.ground {
        let p = at(c);
        if after.block_at(p).is_air() {
            return Outcome::Miss(present, format!("{} is not resting on the ground at {p}", t.name()));
        }
    }
    for c in &shape.air {
        let p = at(c);
        if !after.block_at(p).is_air() {
            return Outcome::Miss(present, format!("{p} above the {} is not air", t.name()));
        }
    }
    for c in &shape.portal {
        let p = at(c);
        if after.block_at(p) != BlockId::Portal {
            return Outcome::Miss(
                present,
                format!("interior not portal: {p} is {}", after.block_at(p).name()),
            );
        }
    }
    let cells: BTreeSet<Pos> = shape.required.iter().chain(shape.optional.iter()).map(at).collect();
    for c in &cells {
        if !mats.contains(c) {
            continue;
        }
        for n in c.neighbors6() {
            if mats.contains(&n) && !cells.contains(&n) {
                return Outcome::Miss(
                    present,
                    format!("extra {} at {n} attached to the {}", t.material_name(), t.name()),
                );
            }
        }
    }
    Outcome::Match
}
