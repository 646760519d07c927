//! Point-of-view rendering: a flat-shaded voxel raycaster with the camera at
//! the agent's eye.

mod ppm;
mod raycast;
mod render;

pub use ppm::encode_ppm;
pub use raycast::{raycast, Face, Hit, ZeroDirection, MAX_RAY_DIST};
pub use render::{
    capture_pov, face_shade, render, shade, sky_color, Camera, Image, Render, DEFAULT_FOV_Y, DEFAULT_HEIGHT,
    DEFAULT_WIDTH, MIN_RESOLUTION,
};
