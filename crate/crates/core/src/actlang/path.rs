//! A* over standing positions: four horizontal moves, each either level,
//! a one-block jump up or a fall of at most three blocks.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::geom::Pos;
use crate::world::{editable, AgentState, VoxelWorld, REACH};

pub const MAX_FALL: i32 = 3;
pub const DEFAULT_NODE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Goal {
    /// Stand exactly here.
    Exact(Pos),
    /// Stand where the block is within reach and not inside the body.
    Reach(Pos),
    /// Feet-cell center within `range` of the block center.
    Near(Pos, f64),
}

impl Goal {
    pub fn satisfied(&self, feet: Pos) -> bool {
        match *self {
            Goal::Exact(p) => feet == p,
            Goal::Reach(t) => {
                let a = AgentState::new(feet);
                !a.occupies(t) && a.eye().distance(t.center()) <= REACH
            }
            Goal::Near(t, r) => feet.center().distance(t.center()) <= r,
        }
    }

    fn heuristic(&self, p: Pos) -> u32 {
        match *self {
            Goal::Exact(t) => {
                let up = (t.y - p.y).max(0);
                let down = (p.y - t.y).max(0);
                p.manhattan_xz(t).max(up).max((down + MAX_FALL - 1) / MAX_FALL) as u32
            }
            // |dx| + |dz| <= floor(r * sqrt 2) whenever the Euclidean
            // horizontal distance is <= r
            Goal::Reach(t) => (p.manhattan_xz(t) - 5).max(0) as u32,
            Goal::Near(t, r) => {
                let slack = libm::floor(r * core::f64::consts::SQRT_2) as i32;
                (p.manhattan_xz(t) - slack).max(0) as u32
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLimits {
    pub node_budget: usize,
    /// Inclusive box the feet must stay inside.
    pub bounds: Option<(Pos, Pos)>,
}

impl Default for PathLimits {
    fn default() -> Self {
        PathLimits {
            node_budget: DEFAULT_NODE_BUDGET,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathError {
    NoPath,
    BudgetExhausted,
}

fn inside(p: Pos, limits: &PathLimits) -> bool {
    if !editable(p) || !editable(p + Pos::UP) {
        return false;
    }
    match limits.bounds {
        Some((lo, hi)) => (lo.x..=hi.x).contains(&p.x) && (lo.y..=hi.y).contains(&p.y) && (lo.z..=hi.z).contains(&p.z),
        None => true,
    }
}

/// Standing positions reachable from `p` in one move, in a fixed order.
pub fn moves(world: &VoxelWorld, p: Pos, limits: &PathLimits) -> Vec<Pos> {
    let mut out = Vec::with_capacity(4);
    for (dx, dz) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
        let n = p.offset(dx, 0, dz);
        if world.standable(n) {
            if inside(n, limits) {
                out.push(n);
            }
            continue;
        }
        let body_fits = world.block_at(n).is_passable() && world.block_at(n + Pos::UP).is_passable();
        if body_fits {
            for k in 1..=MAX_FALL {
                let c = n.offset(0, -k, 0);
                if !world.block_at(c).is_passable() {
                    break;
                }
                if world.standable(c) {
                    if inside(c, limits) {
                        out.push(c);
                    }
                    break;
                }
            }
        } else {
            let up = n + Pos::UP;
            if world.standable(up) && world.block_at(p.offset(0, 2, 0)).is_passable() && inside(up, limits) {
                out.push(up);
            }
        }
    }
    out
}

/// Shortest path (excluding `start`) to a position satisfying `goal`.
pub fn find_path(world: &VoxelWorld, start: Pos, goal: Goal, limits: &PathLimits) -> Result<Vec<Pos>, PathError> {
    if goal.satisfied(start) {
        return Ok(Vec::new());
    }
    let mut g: BTreeMap<Pos, u32> = BTreeMap::new();
    let mut parent: BTreeMap<Pos, Pos> = BTreeMap::new();
    let mut open = BinaryHeap::new();
    g.insert(start, 0);
    open.push(Reverse((goal.heuristic(start), 0u32, start)));
    let mut expanded = 0usize;
    while let Some(Reverse((_, gp, p))) = open.pop() {
        if g.get(&p).is_some_and(|best| *best < gp) {
            continue;
        }
        if goal.satisfied(p) {
            let mut path = alloc::vec![p];
            let mut cur = p;
            while let Some(prev) = parent.get(&cur) {
                if *prev == start {
                    break;
                }
                path.push(*prev);
                cur = *prev;
            }
            path.reverse();
            return Ok(path);
        }
        expanded += 1;
        if expanded > limits.node_budget {
            return Err(PathError::BudgetExhausted);
        }
        for n in moves(world, p, limits) {
            let gn = gp + 1;
            if g.get(&n).map_or(true, |old| gn < *old) {
                g.insert(n, gn);
                parent.insert(n, p);
                open.push(Reverse((gn + goal.heuristic(n), gn, n)));
            }
        }
    }
    Err(PathError::NoPath)
}
