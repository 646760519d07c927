#![no_std]
//! Core of the voxagent building-agent simulator.
//!
//! Everything here is allocation-only `no_std`: a deterministic voxel world
//! with a small crafting tech tree, a raycasting point-of-view renderer, a
//! sandboxed action language with a terminating interpreter, the
//! curriculum/action/critic agent loop (over an abstract LLM backend), a
//! skill library and geometric structure oracles. IO, HTTP and the CLI live
//! in the `voxagent` crate.

extern crate alloc;

pub mod actlang;
pub mod agents;
pub mod geom;
pub mod hash;
pub mod perception;
pub mod skills;
pub mod verify;
pub mod world;

pub use geom::{Pos, Vec3};
