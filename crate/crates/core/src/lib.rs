//! Design and analysis of GaAs-based optical microcavities in the very-strong
//! photon–exciton coupling regime.
//!
//! The crate goes from layer stacks to polariton phase diagrams:
//!
//! - [`stackgen`] and [`tmm`] build DBR cavities and solve them with a
//!   normal-incidence transfer-matrix engine;
//! - [`coupling`] turns field profiles and quantum-well sheets into the total
//!   coupling constant, with a closed-form counterpart for infinite mirrors;
//! - [`polariton`] solves the two-parameter variational problem for the
//!   lower and upper polariton;
//! - [`stability`] models phonon-induced dissociation and saturation;
//! - [`phasediagram`] assembles critical-density curves and boundaries.

pub mod coupling;
pub mod error;
pub mod materials;
pub mod numerics;
pub mod phasediagram;
pub mod polariton;
pub mod stability;
pub mod stackgen;
pub mod tmm;

pub use error::{Error, Result};
