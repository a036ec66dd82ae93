//! Phase-field fatigue fracture of elastic-plastic solids in plane strain.
//!
//! The crate couples a displacement field `u` and a phase field `φ` through a
//! hybrid formulation. Plasticity follows von Mises with Voce isotropic and
//! Chaboche kinematic hardening. Fatigue lowers the toughness through an
//! accumulated history variable. Increments are solved monolithically with a
//! limited-memory BFGS scheme, with full Newton and a single-pass staggered
//! scheme available for comparison.

pub mod assembly;
pub mod config;
pub mod driver;
pub mod element;
pub mod fatigue;
pub mod fracture;
pub mod load;
pub mod mesh;
pub mod metrics;
pub mod output;
pub mod plasticity;
pub mod solver;
pub mod sparse;
pub mod tensor;
