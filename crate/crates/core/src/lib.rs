//! Calibration-driven digital twin of a gate-based quantum processor.
//!
//! The pipeline: parse OpenQASM 2.0 ([`qasm`]), route and decompose to a
//! native gateset ([`compiler`]), schedule with explicit idle intervals
//! ([`schedule`]), attach calibration-derived Kraus channels ([`channels`]),
//! evolve the exact density matrix ([`density`], [`sim`]), and compare
//! outcome distributions ([`metrics`]).

pub mod bench;
pub mod calibration;
pub mod channels;
pub mod circuit;
pub mod cli;
pub mod compiler;
pub mod density;
pub mod linalg;
pub mod metrics;
pub mod qasm;
pub mod schedule;
pub mod sim;
pub mod topology;
