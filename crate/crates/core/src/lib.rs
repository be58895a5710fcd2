//! Finite-model engine for the algebra of fibered correspondences.
//!
//! Everything here is exact and finite: topologies are explicit open
//! families, bundles are finite bases with finite fibers, correspondences
//! are pair sets, and every theorem-shaped statement is a checkable
//! property. The `universe` module loads and emits the JSON documents the
//! `fibra` CLI consumes.

pub mod action;
pub mod bundle;
pub mod error;
pub mod fibered;
pub mod quotient;
pub mod reduced;
pub mod relation;
pub mod set;
pub mod topology;
pub mod universe;

pub use error::{Error, Result};
