use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tables::tables;

pub const INVENTORY_SLOTS: u32 = 36;
pub const DEFAULT_STACK: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemStack {
    pub item: String,
    pub count: u32,
}

impl ItemStack {
    pub fn new(item: impl Into<String>, count: u32) -> Self {
        ItemStack {
            item: item.into(),
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum InventoryError {
    #[error("inventory full")]
    Full,
    #[error("not enough items")]
    Insufficient,
}

/// Item totals. Slots are derived: each item occupies `ceil(count / stack)`
/// slots, which is the normalized (fully merged) layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Inventory {
    counts: BTreeMap<String, u32>,
}

fn slots_for(item: &str, count: u32) -> u32 {
    let stack = tables().stack_limit(item).max(1);
    count.div_ceil(stack)
}

impl Inventory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, item: &str) -> u32 {
        self.counts.get(item).copied().unwrap_or(0)
    }

    pub fn has(&self, item: &str, n: u32) -> bool {
        self.count(item) >= n
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn slots_used(&self) -> u32 {
        self.counts.iter().map(|(k, &v)| slots_for(k, v)).sum()
    }

    /// Whether `n` more of `item` fit.
    pub fn can_add(&self, item: &str, n: u32) -> bool {
        let cur = self.count(item);
        let extra = slots_for(item, cur + n) - slots_for(item, cur);
        self.slots_used() + extra <= INVENTORY_SLOTS
    }

    pub fn add(&mut self, item: &str, n: u32) -> Result<(), InventoryError> {
        if n == 0 {
            return Ok(());
        }
        if !self.can_add(item, n) {
            return Err(InventoryError::Full);
        }
        *self.counts.entry(String::from(item)).or_insert(0) += n;
        Ok(())
    }

    pub fn remove(&mut self, item: &str, n: u32) -> Result<(), InventoryError> {
        let cur = self.count(item);
        if cur < n {
            return Err(InventoryError::Insufficient);
        }
        if cur == n {
            self.counts.remove(item);
        } else {
            self.counts.insert(String::from(item), cur - n);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Normalized slot layout: full stacks first, then the remainder.
    pub fn stacks(&self) -> Vec<ItemStack> {
        let mut out = Vec::new();
        for (item, &count) in &self.counts {
            let stack = tables().stack_limit(item).max(1);
            let mut left = count;
            while left > 0 {
                let n = left.min(stack);
                out.push(ItemStack::new(item.clone(), n));
                left -= n;
            }
        }
        out
    }

    /// `{'oak_log': 2, 'stick': 4}`, in item-name order.
    pub fn render_dict(&self) -> String {
        let body: Vec<String> = self.counts.iter().map(|(k, v)| format!("'{k}': {v}")).collect();
        format!("{{{}}}", body.join(", "))
    }

    /// `Inventory (n/36): {...}`
    pub fn render(&self) -> String {
        format!(
            "Inventory ({}/{}): {}",
            self.slots_used(),
            INVENTORY_SLOTS,
            self.render_dict()
        )
    }
}
