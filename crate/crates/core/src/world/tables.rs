//! Block, item, recipe, smelting and fuel tables.
//!
//! The tables ship as `data/tables.json` and are parsed once on first use.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use once_cell::race::OnceBox;
use serde::Deserialize;

use super::block::BlockId;

pub const TABLES_JSON: &str = include_str!("../../data/tables.json");
pub const TABLES_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
pub struct BlockEntry {
    pub name: String,
    pub color: [u8; 3],
    /// Minimum pickaxe tier needed to break the block (0 = bare hand).
    pub tier: u8,
    pub breakable: bool,
    pub solid: bool,
    pub drop: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ItemEntry {
    pub name: String,
    pub stack: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ToolEntry {
    pub name: String,
    pub tier: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Station {
    None,
    CraftingTable,
    Furnace,
}

impl Station {
    pub fn block(self) -> Option<BlockId> {
        match self {
            Station::None => None,
            Station::CraftingTable => Some(BlockId::CraftingTable),
            Station::Furnace => Some(BlockId::Furnace),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Recipe {
    pub output: String,
    pub count: u32,
    /// `(item, count)`; an item starting with `#` names a tag.
    pub inputs: Vec<(String, u32)>,
    pub station: Station,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SmeltEntry {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FuelEntry {
    pub item: String,
    pub smelts: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Palette {
    pub sky_horizon: [u8; 3],
    pub sky_zenith: [u8; 3],
    pub fog_start: f64,
    pub fog_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Tables {
    pub format_version: u32,
    pub blocks: Vec<BlockEntry>,
    pub items: Vec<ItemEntry>,
    pub tools: Vec<ToolEntry>,
    pub tags: BTreeMap<String, Vec<String>>,
    pub recipes: Vec<Recipe>,
    pub smelting: Vec<SmeltEntry>,
    pub fuel: Vec<FuelEntry>,
    pub palette: Palette,
}

static TABLES: OnceBox<Tables> = OnceBox::new();

/// The shipped tables.
pub fn tables() -> &'static Tables {
    TABLES.get_or_init(|| {
        let t: Tables = serde_json::from_str(TABLES_JSON).expect("shipped tables.json is valid");
        assert_eq!(t.format_version, TABLES_FORMAT_VERSION, "tables.json format_version");
        for (i, b) in BlockId::ALL.iter().enumerate() {
            assert_eq!(t.blocks[i].name, b.name(), "tables.json block order");
        }
        Box::new(t)
    })
}

impl Tables {
    pub fn block(&self, id: BlockId) -> &BlockEntry {
        &self.blocks[id.index()]
    }

    pub fn stack_limit(&self, item: &str) -> u32 {
        self.items
            .iter()
            .find(|i| i.name == item)
            .map(|i| i.stack)
            .unwrap_or(64)
    }

    pub fn tool_tier(&self, item: &str) -> Option<u8> {
        self.tools.iter().find(|t| t.name == item).map(|t| t.tier)
    }

    pub fn is_known_item(&self, item: &str) -> bool {
        BlockId::from_name(item).is_some() || self.items.iter().any(|i| i.name == item)
    }

    pub fn recipe(&self, output: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.output == output)
    }

    pub fn smelt_output(&self, input: &str) -> Option<&str> {
        self.smelting
            .iter()
            .find(|s| s.input == input)
            .map(|s| s.output.as_str())
    }

    pub fn fuel_value(&self, item: &str) -> Option<f64> {
        self.fuel.iter().find(|f| f.item == item).map(|f| f.smelts)
    }

    /// Items matching a recipe input, in table order. Plain names match
    /// themselves.
    pub fn expand_input<'a>(&'a self, input: &'a str) -> Vec<&'a str> {
        match input.strip_prefix('#') {
            Some(tag) => self
                .tags
                .get(tag)
                .map(|v| v.iter().map(String::as_str).collect())
                .unwrap_or_default(),
            None => alloc::vec![input],
        }
    }
}
