//! Exact simulation of dimerized Heisenberg chains used as communication
//! channels.
//!
//! Conventions used throughout:
//! - sites are numbered `1..=N`; site `k` is bit `k-1` of a basis index;
//! - a clear bit is spin up, `|0⟩`, with `σ^z|0⟩ = +|0⟩`;
//! - magnetization is the up count minus the down count;
//! - `H = Σ_k J_k σ_k·σ_{k+1}` in Pauli operators, so times are in units of `1/J`.

pub mod analysis;
pub mod basis;
pub mod density;
pub mod error;
pub mod model;
pub mod protocol;
pub mod quadrature;
pub mod reduce;
pub mod solver;
pub mod state;
pub mod trajectory;

pub use num_complex::Complex64 as C64;

pub use analysis::{find_optimal_time, fit_linear, LinearFit, Peak, PeakRule, PeakStatus, TimeSeries};
pub use basis::{Magnetization, SectorBasis};
pub use density::{BellLabel, DensityMatrix};
pub use error::{Error, Result};
pub use model::{build_chain, ChainSpec, CouplingPattern, Hamiltonian};
pub use protocol::{CellOutcome, CellSpec, InitialStateKind, PreparedChain, Protocol, ProtocolRegistry};
pub use solver::{GroundStateResult, PropagatorConfig};
pub use state::{Pauli, StateVector};
