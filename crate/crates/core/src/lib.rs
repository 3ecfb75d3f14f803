//! Physics core for a current-carrying chip that diamagnetically levitates a
//! nanodiamond and splits its centre-of-mass motion with a spin-dependent
//! (Stern-Gerlach) force.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. Everything here is a pure computation: wire fields, trap
//! parameters, closed-form protocol trajectories, RK4 integration through the
//! simulated field and the stage-3 closure solve. File formats, sweeps and the
//! command line live in the companion `levsg` crate.
//!
//! All quantities are SI.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analytic;
pub mod closure;
pub mod constants;
pub mod dynamics;
pub mod estimates;
pub mod field;
pub mod math;
pub mod model;
pub mod quadrature;
pub mod sweep;

pub use constants::PhysicalConstants;
pub use model::{
    build_levitation_assembly, build_separation_assembly, ChipConfig, Conductor, EndRule,
    GradientSign, ModelError, Particle, SpinBranch, StagePlan, StageSpec, WireAxis, WireSegment,
};
