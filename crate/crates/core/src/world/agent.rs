use alloc::collections::BTreeSet;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::inventory::Inventory;
use crate::geom::{Pos, Vec3};

pub const EYE_HEIGHT: f64 = 1.6;
pub const MAX_HEALTH: f64 = 20.0;

/// The embodied bot. The body occupies `feet` and the cell above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub feet: Pos,
    /// Degrees. 0 looks toward -z, 90 toward -x.
    pub yaw: f64,
    /// Degrees in [-90, 90]; positive looks up.
    pub pitch: f64,
    pub inventory: Inventory,
    pub equipment: Option<String>,
    /// Every item name that has ever been in the inventory.
    #[serde(default)]
    pub items_seen: BTreeSet<String>,
}

impl AgentState {
    pub fn new(feet: Pos) -> Self {
        AgentState {
            feet,
            yaw: 0.0,
            pitch: 0.0,
            inventory: Inventory::new(),
            equipment: None,
            items_seen: BTreeSet::new(),
        }
    }

    pub fn head(&self) -> Pos {
        self.feet + Pos::UP
    }

    pub fn eye(&self) -> Vec3 {
        Vec3::new(
            self.feet.x as f64 + 0.5,
            self.feet.y as f64 + EYE_HEIGHT,
            self.feet.z as f64 + 0.5,
        )
    }

    pub fn occupies(&self, p: Pos) -> bool {
        p == self.feet || p == self.head()
    }

    pub fn health(&self) -> f64 {
        MAX_HEALTH
    }

    pub fn hunger(&self) -> f64 {
        MAX_HEALTH
    }

    pub fn give(&mut self, item: &str, n: u32) -> Result<(), super::inventory::InventoryError> {
        self.inventory.add(item, n)?;
        if n > 0 && !self.items_seen.contains(item) {
            self.items_seen.insert(String::from(item));
        }
        Ok(())
    }

    pub fn take(&mut self, item: &str, n: u32) -> Result<(), super::inventory::InventoryError> {
        self.inventory.remove(item, n)?;
        if self.equipment.as_deref() == Some(item) && self.inventory.count(item) == 0 {
            self.equipment = None;
        }
        Ok(())
    }

    /// Points the head at `target`.
    pub fn look_at(&mut self, target: Vec3) {
        let d = target - self.eye();
        let horiz = libm::sqrt(d.x * d.x + d.z * d.z);
        if horiz == 0.0 && d.y == 0.0 {
            return;
        }
        self.pitch = libm::atan2(d.y, horiz).to_degrees();
        if horiz > 0.0 {
            self.yaw = libm::atan2(-d.x, -d.z).to_degrees();
        }
    }

    /// Unit view direction from yaw and pitch.
    pub fn forward(&self) -> Vec3 {
        view_direction(self.yaw, self.pitch)
    }
}

pub fn view_direction(yaw_deg: f64, pitch_deg: f64) -> Vec3 {
    let yaw = yaw_deg.to_radians();
    let pitch = pitch_deg.to_radians();
    Vec3::new(
        -libm::sin(yaw) * libm::cos(pitch),
        libm::sin(pitch),
        -libm::cos(yaw) * libm::cos(pitch),
    )
}
