use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Every block kind the simulator knows about.
///
/// The discriminant order is the palette order used by the tables file and
/// by canonical shape hashing, so new variants go at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum BlockId {
    Air,
    Bedrock,
    Dirt,
    GrassBlock,
    Stone,
    Cobblestone,
    OakLog,
    OakLeaves,
    SpruceLog,
    OakPlanks,
    SprucePlanks,
    CraftingTable,
    Furnace,
    CoalOre,
    IronOre,
    Water,
    Obsidian,
    Portal,
}

impl BlockId {
    pub const ALL: [BlockId; 18] = [
        BlockId::Air,
        BlockId::Bedrock,
        BlockId::Dirt,
        BlockId::GrassBlock,
        BlockId::Stone,
        BlockId::Cobblestone,
        BlockId::OakLog,
        BlockId::OakLeaves,
        BlockId::SpruceLog,
        BlockId::OakPlanks,
        BlockId::SprucePlanks,
        BlockId::CraftingTable,
        BlockId::Furnace,
        BlockId::CoalOre,
        BlockId::IronOre,
        BlockId::Water,
        BlockId::Obsidian,
        BlockId::Portal,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            BlockId::Air => "air",
            BlockId::Bedrock => "bedrock",
            BlockId::Dirt => "dirt",
            BlockId::GrassBlock => "grass_block",
            BlockId::Stone => "stone",
            BlockId::Cobblestone => "cobblestone",
            BlockId::OakLog => "oak_log",
            BlockId::OakLeaves => "oak_leaves",
            BlockId::SpruceLog => "spruce_log",
            BlockId::OakPlanks => "oak_planks",
            BlockId::SprucePlanks => "spruce_planks",
            BlockId::CraftingTable => "crafting_table",
            BlockId::Furnace => "furnace",
            BlockId::CoalOre => "coal_ore",
            BlockId::IronOre => "iron_ore",
            BlockId::Water => "water",
            BlockId::Obsidian => "obsidian",
            BlockId::Portal => "portal",
        }
    }

    pub fn from_name(name: &str) -> Option<BlockId> {
        BlockId::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn is_air(self) -> bool {
        matches!(self, BlockId::Air)
    }

    /// Cells the agent's body can occupy.
    pub const fn is_passable(self) -> bool {
        matches!(self, BlockId::Air | BlockId::Water | BlockId::Portal)
    }

    /// Cells a block may be placed into.
    pub const fn is_replaceable(self) -> bool {
        matches!(self, BlockId::Air | BlockId::Water)
    }

    pub const fn is_planks(self) -> bool {
        matches!(self, BlockId::OakPlanks | BlockId::SprucePlanks)
    }

    pub const fn is_log(self) -> bool {
        matches!(self, BlockId::OakLog | BlockId::SpruceLog)
    }

    /// Collapses wood species so that builds differing only in plank or log
    /// type compare equal.
    pub const fn material_class(self) -> BlockId {
        match self {
            BlockId::SprucePlanks => BlockId::OakPlanks,
            BlockId::SpruceLog => BlockId::OakLog,
            other => other,
        }
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BlockId {
    type Err = UnknownBlock;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BlockId::from_name(s).ok_or(UnknownBlock)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownBlock;

impl fmt::Display for UnknownBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown block name")
    }
}
