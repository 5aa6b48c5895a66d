//! Underwater emergency communication network simulator.
//!
//! Pipeline: link budgets ([`channel`]) → relay detection and mode partition
//! ([`erm`]) → relay selection by reinforcement learning ([`relay`]) → AUV
//! clustering, velocity and energy accounting ([`deploy`]) → time/energy
//! Pareto search ([`moea`]).
//!
//! The crate is `no_std` with `alloc`; all float math goes through [`math`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod deploy;
pub mod erm;
pub mod math;
pub mod model;
pub mod moea;
pub mod relay;
pub mod rng;

pub use channel::{ChannelError, InterferenceState, LinkBudget};
pub use model::{
    distance, generate_scenario, validate_scenario, Area, AuvNode, ChannelParams, EnergyParams,
    LinkSpec, LinkTable, LinkType, ModelError, Point3, Scenario, ScenarioConfig, UsnNode, Usv,
    Violation,
};
