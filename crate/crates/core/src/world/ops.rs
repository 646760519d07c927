use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::agent::AgentState;
use super::block::BlockId;
use super::inventory::{Inventory, InventoryError, ItemStack};
use super::tables::{tables, Station};
use super::{editable, VoxelWorld};
use crate::geom::Pos;

pub const REACH: f64 = 4.0;
pub const STATION_RANGE: f64 = 3.0;
pub const BREAK_TICKS: u64 = 10;
pub const PLACE_TICKS: u64 = 10;
pub const CRAFT_TICKS: u64 = 20;
pub const SMELT_TICKS: u64 = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("block at {0} is out of reach")]
    OutOfReach(Pos),
    #[error("there is no block at {0}")]
    NoBlock(Pos),
    #[error("{0} cannot be broken")]
    Unbreakable(BlockId),
    #[error("breaking {block} needs a better pickaxe equipped")]
    InsufficientTool { block: BlockId, needed_tier: u8 },
    #[error("no {0} in inventory")]
    NotInInventory(String),
    #[error("{0} is not a placeable block")]
    NotPlaceable(String),
    #[error("cannot place at {0}: no adjacent block to support it")]
    NoSupport(Pos),
    #[error("cannot place at {0}: occupied by {1}")]
    Occupied(Pos, BlockId),
    #[error("cannot place at {0}: the bot is standing there")]
    WouldSuffocate(Pos),
    #[error("position {0} is outside the world")]
    OutOfWorld(Pos),
    #[error("no recipe for {0}")]
    NoRecipe(String),
    #[error("{0} needs a {1} nearby")]
    MissingStation(String, &'static str),
    #[error("missing inputs: {}", render_missing(.0))]
    MissingInputs(Vec<(String, u32)>),
    #[error("not enough fuel: can smelt {capacity}, need {needed}")]
    InsufficientFuel { capacity: u32, needed: u32 },
    #[error("{0} is not a fuel")]
    NotFuel(String),
    #[error("inventory is full")]
    InventoryFull,
    #[error("count must be at least 1")]
    InvalidCount,
    #[error("not a valid portal frame")]
    NotAValidFrame,
    #[error("worlds have different seeds or kinds")]
    SeedMismatch,
}

fn render_missing(m: &[(String, u32)]) -> String {
    let parts: Vec<String> = m.iter().map(|(i, n)| alloc::format!("{n} {i}")).collect();
    parts.join(", ")
}

impl From<InventoryError> for WorldError {
    fn from(_: InventoryError) -> Self {
        WorldError::InventoryFull
    }
}

/// Eye-to-block-center distance within [`REACH`].
pub fn in_reach(agent: &AgentState, p: Pos) -> bool {
    agent.eye().distance(p.center()) <= REACH
}

fn equipped_tier(agent: &AgentState) -> u8 {
    agent
        .equipment
        .as_deref()
        .and_then(|e| tables().tool_tier(e))
        .unwrap_or(0)
}

/// Breaks the block at `pos` and puts its drop into the inventory.
pub fn break_block(world: &mut VoxelWorld, agent: &mut AgentState, pos: Pos) -> Result<ItemStack, WorldError> {
    if !in_reach(agent, pos) {
        return Err(WorldError::OutOfReach(pos));
    }
    let block = world.block_at(pos);
    if block.is_air() {
        return Err(WorldError::NoBlock(pos));
    }
    let entry = tables().block(block);
    if !entry.breakable || !editable(pos) {
        return Err(WorldError::Unbreakable(block));
    }
    if equipped_tier(agent) < entry.tier {
        return Err(WorldError::InsufficientTool {
            block,
            needed_tier: entry.tier,
        });
    }
    let drop = entry.drop.clone().unwrap_or_else(|| block.name().to_string());
    if !agent.inventory.can_add(&drop, 1) {
        return Err(WorldError::InventoryFull);
    }
    world.set_block(pos, BlockId::Air);
    agent.give(&drop, 1)?;
    world.time += BREAK_TICKS;
    Ok(ItemStack::new(drop, 1))
}

/// Places one `item` block at `pos`.
pub fn place_block(world: &mut VoxelWorld, agent: &mut AgentState, pos: Pos, item: &str) -> Result<(), WorldError> {
    if !agent.inventory.has(item, 1) {
        return Err(WorldError::NotInInventory(item.to_string()));
    }
    let block = match BlockId::from_name(item) {
        Some(b) if tables().block(b).solid => b,
        _ => return Err(WorldError::NotPlaceable(item.to_string())),
    };
    if !editable(pos) {
        return Err(WorldError::OutOfWorld(pos));
    }
    if !in_reach(agent, pos) {
        return Err(WorldError::OutOfReach(pos));
    }
    let existing = world.block_at(pos);
    if !existing.is_replaceable() {
        return Err(WorldError::Occupied(pos, existing));
    }
    if agent.occupies(pos) {
        return Err(WorldError::WouldSuffocate(pos));
    }
    let supported = pos.neighbors6().iter().any(|n| !world.block_at(*n).is_passable());
    if !supported {
        return Err(WorldError::NoSupport(pos));
    }
    agent.take(item, 1)?;
    world.set_block(pos, block);
    world.time += PLACE_TICKS;
    Ok(())
}

/// Nearest `block` whose center is within `range` of the agent's feet
/// cell center, scanning a cube around the agent.
pub fn station_within(world: &VoxelWorld, agent: &AgentState, block: BlockId, range: f64) -> Option<Pos> {
    let r = libm::ceil(range) as i32;
    let origin = agent.feet.center();
    let mut best: Option<(f64, Pos)> = None;
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let p = agent.feet.offset(x, y, z);
                if world.block_at(p) != block {
                    continue;
                }
                let d = origin.distance(p.center());
                if d <= range && best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, p));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

fn station_name(s: Station) -> &'static str {
    match s {
        Station::None => "none",
        Station::CraftingTable => "crafting_table",
        Station::Furnace => "furnace",
    }
}

/// Consumes one recipe application from `inv`, returning what was missing
/// if it cannot.
fn consume_inputs(inv: &mut Inventory, inputs: &[(String, u32)], times: u32) -> Result<(), Vec<(String, u32)>> {
    let t = tables();
    let mut missing = Vec::new();
    for (input, n) in inputs {
        let members = t.expand_input(input);
        let need = n * times;
        let have: u32 = members.iter().map(|m| inv.count(m)).sum();
        if have < need {
            missing.push((input.trim_start_matches('#').to_string(), need - have));
        }
    }
    if !missing.is_empty() {
        return Err(missing);
    }
    for (input, n) in inputs {
        let mut left = n * times;
        for m in t.expand_input(input) {
            let take = inv.count(m).min(left);
            if take > 0 {
                inv.remove(m, take).expect("counted above");
                left -= take;
            }
        }
    }
    Ok(())
}

/// Crafts `item` `count` times.
pub fn craft(world: &mut VoxelWorld, agent: &mut AgentState, item: &str, count: u32) -> Result<(), WorldError> {
    if count == 0 {
        return Err(WorldError::InvalidCount);
    }
    let recipe = tables()
        .recipe(item)
        .ok_or_else(|| WorldError::NoRecipe(item.to_string()))?;
    if let Some(station) = recipe.station.block() {
        if station_within(world, agent, station, STATION_RANGE).is_none() {
            return Err(WorldError::MissingStation(
                item.to_string(),
                station_name(recipe.station),
            ));
        }
    }
    let mut inv = agent.inventory.clone();
    consume_inputs(&mut inv, &recipe.inputs, count).map_err(WorldError::MissingInputs)?;
    inv.add(&recipe.output, recipe.count * count)?;
    agent.inventory = inv;
    if agent
        .equipment
        .as_deref()
        .is_some_and(|e| agent.inventory.count(e) == 0)
    {
        agent.equipment = None;
    }
    agent.items_seen.insert(recipe.output.clone());
    world.time += CRAFT_TICKS * count as u64;
    Ok(())
}

/// Smelts `count` of `item` in a nearby furnace, burning `fuel`.
pub fn smelt(
    world: &mut VoxelWorld,
    agent: &mut AgentState,
    item: &str,
    count: u32,
    fuel: &str,
) -> Result<(), WorldError> {
    if count == 0 {
        return Err(WorldError::InvalidCount);
    }
    if station_within(world, agent, BlockId::Furnace, STATION_RANGE).is_none() {
        return Err(WorldError::MissingStation(item.to_string(), "furnace"));
    }
    let output = tables()
        .smelt_output(item)
        .ok_or_else(|| WorldError::NoRecipe(item.to_string()))?;
    let have = agent.inventory.count(item);
    if have < count {
        return Err(WorldError::MissingInputs(alloc::vec![(item.to_string(), count - have)]));
    }
    let value = tables()
        .fuel_value(fuel)
        .ok_or_else(|| WorldError::NotFuel(fuel.to_string()))?;
    let fuel_held = if fuel == item {
        agent.inventory.count(fuel) - count
    } else {
        agent.inventory.count(fuel)
    };
    let capacity = libm::floor(fuel_held as f64 * value) as u32;
    if capacity < count {
        return Err(WorldError::InsufficientFuel {
            capacity,
            needed: count,
        });
    }
    let mut burn = 1;
    while (libm::floor(burn as f64 * value) as u32) < count {
        burn += 1;
    }
    let mut inv = agent.inventory.clone();
    inv.remove(item, count)?;
    inv.remove(fuel, burn)?;
    inv.add(output, count)?;
    agent.inventory = inv;
    if agent
        .equipment
        .as_deref()
        .is_some_and(|e| agent.inventory.count(e) == 0)
    {
        agent.equipment = None;
    }
    agent.items_seen.insert(output.to_string());
    world.time += SMELT_TICKS * count as u64;
    Ok(())
}

/// Holds `item` in the main hand.
pub fn equip(agent: &mut AgentState, item: &str) -> Result<(), WorldError> {
    if !agent.inventory.has(item, 1) {
        return Err(WorldError::NotInInventory(item.to_string()));
    }
    agent.equipment = Some(item.to_string());
    Ok(())
}

/// Distinct non-air block names in the cube of half-width `radius` around
/// `pos`, in order of first occurrence in an `(x, y, z)` lexicographic scan.
pub fn nearby_blocks(world: &VoxelWorld, pos: Pos, radius: i32) -> Vec<&'static str> {
    let mut seen = [false; BlockId::ALL.len()];
    let mut out = Vec::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            for z in -radius..=radius {
                let b = world.block_at(pos.offset(x, y, z));
                if !b.is_air() && !seen[b.index()] {
                    seen[b.index()] = true;
                    out.push(b.name());
                }
            }
        }
    }
    out
}

/// Voyager-style time-of-day label.
pub fn time_label(ticks: u64) -> &'static str {
    match ticks % 24000 {
        0..=999 => "sunrise",
        1000..=5999 => "day",
        6000..=6999 => "noon",
        7000..=11999 => "day",
        12000..=12999 => "sunset",
        13000..=17999 => "night",
        18000..=18999 => "midnight",
        _ => "night",
    }
}
