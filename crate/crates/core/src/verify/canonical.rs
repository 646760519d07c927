use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geom::Pos;
use crate::hash::Fnv64;
use crate::world::{BlockId, WorldDiff};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("the block set is empty")]
pub struct EmptySet;

/// A block set normalized for translation and quarter turns about the
/// vertical axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalShape {
    /// Sorted `(offset, block)` pairs with the minimum corner at the origin.
    pub blocks: Vec<(Pos, BlockId)>,
    pub signature: u64,
}

fn normalized(blocks: &[(Pos, BlockId)]) -> Vec<(Pos, BlockId)> {
    let min = blocks.iter().fold(Pos::new(i32::MAX, i32::MAX, i32::MAX), |m, (p, _)| {
        Pos::new(m.x.min(p.x), m.y.min(p.y), m.z.min(p.z))
    });
    let mut out: Vec<(Pos, BlockId)> = blocks.iter().map(|(p, b)| (*p - min, *b)).collect();
    out.sort();
    out
}

/// Canonical form: the lexicographically smallest normalized set over the
/// four yaw rotations. Later duplicates of a position override earlier ones.
pub fn canonicalize(blocks: &[(Pos, BlockId)]) -> Result<CanonicalShape, EmptySet> {
    let dedup: BTreeMap<Pos, BlockId> = blocks.iter().copied().collect();
    if dedup.is_empty() {
        return Err(EmptySet);
    }
    let mut current: Vec<(Pos, BlockId)> = dedup.into_iter().collect();
    let mut best = normalized(&current);
    for _ in 0..3 {
        for (p, _) in current.iter_mut() {
            *p = p.rotate_yaw();
        }
        let cand = normalized(&current);
        if cand < best {
            best = cand;
        }
    }
    let mut h = Fnv64::new();
    h.write_u64(best.len() as u64);
    for (p, b) in &best {
        h.write_i32(p.x);
        h.write_i32(p.y);
        h.write_i32(p.z);
        h.write_u8(*b as u8);
    }
    Ok(CanonicalShape {
        blocks: best,
        signature: h.finish(),
    })
}

/// Signature of a build for the uniqueness count: the added blocks with
/// material classes collapsed. Dirt is treated as scaffolding and ignored
/// unless the build is made of nothing else.
pub fn shape_signature(diff: &WorldDiff) -> Result<u64, EmptySet> {
    let mut blocks: Vec<(Pos, BlockId)> = diff
        .added
        .iter()
        .filter(|(_, b)| *b != BlockId::Dirt)
        .map(|(p, b)| (*p, b.material_class()))
        .collect();
    if blocks.is_empty() {
        blocks = diff.added.clone();
    }
    canonicalize(&blocks).map(|c| c.signature)
}
