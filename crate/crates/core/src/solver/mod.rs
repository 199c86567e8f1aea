//! Ground states and time evolution.

pub mod krylov;
pub mod lanczos;

pub use krylov::{evolve, evolve_series, evolve_series_with, PropagatorConfig, Trajectory};
pub use lanczos::{ground_state, ground_state_in_sector, GroundStateResult, LanczosConfig};
