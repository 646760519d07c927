use alloc::vec;
use alloc::vec::Vec;

use super::raycast::{raycast, Face, Hit, MAX_RAY_DIST};
use crate::geom::{Pos, Vec3};
use crate::world::{tables, AgentState, VoxelWorld};

pub const DEFAULT_WIDTH: u32 = 320;
pub const DEFAULT_HEIGHT: u32 = 240;
pub const DEFAULT_FOV_Y: f64 = 70.0;
pub const MIN_RESOLUTION: u32 = 16;

/// Row-major RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Image {
        Image {
            width,
            height,
            data: vec![0; 3 * width as usize * height as usize],
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

/// A pinhole camera. Pixel `(0, 0)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub fov_y: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    /// The camera at the agent's eye with the agent's head orientation.
    pub fn at_agent(agent: &AgentState, width: u32, height: u32) -> Camera {
        Camera {
            position: agent.eye(),
            yaw: agent.yaw,
            pitch: agent.pitch.clamp(-90.0, 90.0),
            fov_y: DEFAULT_FOV_Y,
            width: width.max(MIN_RESOLUTION),
            height: height.max(MIN_RESOLUTION),
        }
    }

    /// Orthonormal `(forward, right, up)` basis.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = crate::world::view_direction(self.yaw, self.pitch);
        let yaw = self.yaw.to_radians();
        let right = Vec3::new(libm::cos(yaw), 0.0, -libm::sin(yaw));
        let up = right.cross(forward);
        (forward, right, up)
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.height as f64 / 2.0) / libm::tan((self.fov_y / 2.0).to_radians())
    }

    /// Direction (unnormalized) of the primary ray through the center of
    /// pixel `(px, py)`.
    pub fn ray(&self, px: u32, py: u32) -> Vec3 {
        let (forward, right, up) = self.basis();
        let f = self.focal();
        let sx = px as f64 + 0.5 - self.width as f64 / 2.0;
        let sy = self.height as f64 / 2.0 - (py as f64 + 0.5);
        forward * f + right * sx + up * sy
    }

    /// Continuous pixel coordinates of a world point, if it is in front of
    /// the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let (forward, right, up) = self.basis();
        let d = p - self.position;
        let z = d.dot(forward);
        if z <= 1e-9 {
            return None;
        }
        let f = self.focal();
        let x = self.width as f64 / 2.0 + f * d.dot(right) / z;
        let y = self.height as f64 / 2.0 - f * d.dot(up) / z;
        Some((x, y))
    }
}

/// Shading factor for a face.
pub fn face_shade(face: Face) -> f64 {
    match face {
        Face::PosY => 1.0,
        Face::PosX | Face::NegX => 0.8,
        Face::PosZ | Face::NegZ => 0.7,
        Face::NegY => 0.5,
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

fn to_f(c: [u8; 3]) -> [f64; 3] {
    [c[0] as f64, c[1] as f64, c[2] as f64]
}

fn to_u8(c: [f64; 3]) -> [u8; 3] {
    let q = |v: f64| libm::round(v.clamp(0.0, 255.0)) as u8;
    [q(c[0]), q(c[1]), q(c[2])]
}

/// Sky color for a (normalized) view direction: horizon below, zenith above.
pub fn sky_color(dir: Vec3) -> [f64; 3] {
    let pal = &tables().palette;
    let t = dir.y.clamp(0.0, 1.0);
    lerp(to_f(pal.sky_horizon), to_f(pal.sky_zenith), t)
}

/// Final color of a primary ray.
pub fn shade(hit: Option<&Hit>, dir: Vec3) -> [u8; 3] {
    let sky = sky_color(dir);
    let Some(hit) = hit else {
        return to_u8(sky);
    };
    let pal = &tables().palette;
    let base = to_f(tables().block(hit.block).color);
    let k = face_shade(hit.face);
    let lit = [base[0] * k, base[1] * k, base[2] * k];
    let fog = ((hit.dist - pal.fog_start) / (pal.fog_end - pal.fog_start)).clamp(0.0, 1.0);
    to_u8(lerp(lit, sky, fog))
}

/// An image plus, per pixel, the cell its primary ray hit.
#[derive(Debug, Clone)]
pub struct Render {
    pub image: Image,
    pub hits: Vec<Option<Pos>>,
}

/// Renders one primary ray per pixel.
pub fn render(world: &VoxelWorld, camera: &Camera) -> Render {
    let mut image = Image::new(camera.width, camera.height);
    let mut hits = Vec::with_capacity((camera.width * camera.height) as usize);
    for py in 0..camera.height {
        for px in 0..camera.width {
            let dir = camera.ray(px, py).normalized();
            let hit = raycast(world, camera.position, dir, MAX_RAY_DIST).expect("camera rays are never zero");
            image.set_pixel(px, py, shade(hit.as_ref(), dir));
            hits.push(hit.map(|h| h.pos));
        }
    }
    Render { image, hits }
}

/// Screenshot from the agent's point of view.
pub fn capture_pov(world: &VoxelWorld, agent: &AgentState, width: u32, height: u32) -> Image {
    render(world, &Camera::at_agent(agent, width, height)).image
}
