//! Simulator and analytic library for optimal mirror phase-covariant
//! cloning of polarization qubits on a linear-optical platform.
//!
//! The crate has two independent routes to every figure of merit. The
//! analytic route ([`analytic`]) evaluates the closed-form cloning
//! transformation directly. The simulation route models the physical
//! implementation end to end: a down-conversion photon source
//! ([`optics::spdc_state`]), a polarization-dependent beam splitter, a
//! feedforward damping stage, and imperfect detectors ([`detectors`]) with
//! post-selection. [`experiments`] drives both routes over input ensembles
//! and reproduces the published characterization tables.

pub mod analytic;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod optics;
pub mod quad;

pub use error::{Error, Result};
