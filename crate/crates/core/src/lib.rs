//! Band-gap analysis and parameter ranking for layered metamaterials.
//!
//! The crate is organised bottom-up:
//!
//! * [`dispersion`] evaluates the two-layer dispersion relation, scans for band gaps
//!   and extracts the two quantities of interest (first cut-off, first gap width).
//! * [`game`] holds finite cooperative games, exact Shapley values, the
//!   super-additivity check and the monotone-closure repair.
//! * [`sensitivity`] turns QoI evaluations into per-grid-point games and builds
//!   dominance maps.
//! * [`dataset`] generates and ingests `(ratios -> QoIs)` tables, splits and scales them.
//! * [`regress`] fits the polynomial, random-forest and MLP surrogates.
//! * [`cli`] wires everything behind the `metashap` binary.

pub mod cli;
pub mod dataset;
pub mod dispersion;
pub mod error;
pub mod game;
pub mod regress;
pub mod sensitivity;

pub use error::{Error, Result};
