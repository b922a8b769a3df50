//! Simulation and tuning toolkit for energy-saving sub-optimal sliding mode
//! control (ES-SOSMC) of perturbed double-integrator plants.
//!
//! The crate is organised around a fixed-step closed-loop simulator ([`sim`]),
//! a registry of switching laws ([`control`]), worst-case cycle analysis and
//! convergence-time bounds ([`convergence`]), constrained (beta1, beta2)
//! tuning ([`tuner`]), describing-function chattering prediction ([`chatter`]),
//! rough-surface excitation ([`surface`]) and the AFM-style scanning /
//! machining application wrappers ([`scenario`]).

pub mod chatter;
pub mod control;
pub mod convergence;
pub mod scenario;
pub mod sim;
pub mod surface;
pub mod tuner;
pub mod util;

mod error;

pub use error::EssmcError;

pub type Result<T> = std::result::Result<T, EssmcError>;
