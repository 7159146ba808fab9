//! Non-Markovianity of a qubit in a zero-temperature Lorentzian bath.
//!
//! The qubit `H_s = epsilon sigma_z / 2` couples to bosonic or fermionic
//! modes through `L = sigma_- + chi sigma_+`, where `chi` interpolates between
//! the rotating-wave limit (`chi = 0`) and the full coupling (`chi = 1`). The
//! reduced dynamics comes from a truncated hierarchy of auxiliary density
//! matrices ([`heom`]); the rotating-wave limit is cross-checked against an
//! exact solution ([`rwa`]); and memory effects are quantified by the
//! trace-distance measure in [`measure`].

// negated comparisons are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod heom;
pub mod measure;
pub mod operators;
pub mod rwa;

pub use bath::{BathModel, Statistics};
pub use dynamics::{DynamicalMap, Dynamics, Trajectory};
pub use error::{Error, Result};
pub use heom::{
    converged_depth, converged_depth_for, converged_map, propagate, DepthVerdict, HeomDynamics,
    HierarchyState, PropagatorConfig,
};
pub use measure::{maximize, nonmarkovianity_for_pair, InitialPair, MeasureResult, Sampler};
pub use operators::{commutator, phase_unitary, trace_distance, CouplingOperator, QubitMatrix};
pub use rwa::{propagate_rwa, solve_f, RwaDynamics, RwaSolution};

pub use num_complex::Complex64 as C64;
