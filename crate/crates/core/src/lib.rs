//! Agent-based and continuum simulation of light-mediated collective
//! construction.
//!
//! Robots move at constant speed, steer up the gradient of a light field
//! they paint themselves, and pick up or drop substrate elements depending
//! on the light they sense.

pub mod agent;
pub mod continuum;
pub mod controller;
pub mod error;
pub mod geom;
pub mod metrics;
pub mod photormone;
pub mod quad;
pub mod rng;
pub mod trap;
pub mod world;

pub use error::{Error, Result};
pub use geom::{Boundary, Rect, SimConfig, Vec2};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/traps.md")]
    mod traps {}
    #[doc = include_str!("../../../book/src/orbits.md")]
    mod orbits {}
    #[doc = include_str!("../../../book/src/light.md")]
    mod light {}
    #[doc = include_str!("../../../book/src/behaviour.md")]
    mod behaviour {}
    #[doc = include_str!("../../../book/src/world.md")]
    mod world {}
    #[doc = include_str!("../../../book/src/continuum.md")]
    mod continuum {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
