use crate::geom::Pos;
use crate::world::{BlockId, VoxelWorld, WorldError};

/// Frame cells (excluding the optional corners) relative to the lower-left
/// interior cell, for a frame in the plane spanned by `u` and +y.
fn frame_cells(origin: Pos, u: Pos) -> [Pos; 10] {
    let at = |du: i32, dy: i32| Pos::new(origin.x + u.x * du, origin.y + dy, origin.z + u.z * du);
    [
        at(0, -1),
        at(1, -1),
        at(0, 3),
        at(1, 3),
        at(-1, 0),
        at(-1, 1),
        at(-1, 2),
        at(2, 0),
        at(2, 1),
        at(2, 2),
    ]
}

/// Lights an obsidian frame: if `p` lies in an all-air 2×3 interior of a
/// 4-wide, 5-tall frame (corners optional), the interior becomes portal.
pub fn ignite(world: &mut VoxelWorld, p: Pos) -> Result<(), WorldError> {
    if !world.block_at(p).is_air() {
        return Err(WorldError::NotAValidFrame);
    }
    for u in [Pos::new(1, 0, 0), Pos::new(0, 0, 1)] {
        for du in 0..2 {
            for dy in 0..3 {
                let origin = Pos::new(p.x - u.x * du, p.y - dy, p.z - u.z * du);
                let interior: [Pos; 6] = core::array::from_fn(|i| {
                    let (a, b) = ((i / 3) as i32, (i % 3) as i32);
                    Pos::new(origin.x + u.x * a, origin.y + b, origin.z + u.z * a)
                });
                if !interior.iter().all(|c| world.block_at(*c).is_air()) {
                    continue;
                }
                if frame_cells(origin, u)
                    .iter()
                    .all(|c| world.block_at(*c) == BlockId::Obsidian)
                {
                    for c in interior {
                        world.set_block(c, BlockId::Portal);
                    }
                    return Ok(());
                }
            }
        }
    }
    Err(WorldError::NotAValidFrame)
}
