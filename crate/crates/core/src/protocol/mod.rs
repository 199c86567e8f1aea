//! Communication protocols and the registry that selects them by name.

pub mod attaching;
pub mod classical;
pub mod quantum;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::analysis::{time_grid, Peak, TimeSeries};
use crate::error::{Error, Result};
use crate::model::{build_chain, ChainSpec, Hamiltonian};
use crate::solver::{ground_state, LanczosConfig, PropagatorConfig};
use crate::state::StateVector;
use crate::trajectory::Diagnostics;

pub use attaching::{AttachScheme, AttachingChain};

/// Starting state of the chain before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialStateKind {
    GroundState,
    /// Singlets on bonds 1–2, 3–4, …
    SingletProduct,
}

impl InitialStateKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialStateKind::GroundState => "gs",
            InitialStateKind::SingletProduct => "singlets",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gs" | "ground-state" => Ok(InitialStateKind::GroundState),
            "singlets" | "singlet-product" => Ok(InitialStateKind::SingletProduct),
            other => Err(Error::InvalidArgument(format!("unknown initial state {other:?}"))),
        }
    }
}

impl fmt::Display for InitialStateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(|01⟩ - |10⟩)/√2` on every bond `2k-1, 2k`.
pub fn singlet_product(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 || n_qubits % 2 != 0 {
        return Err(Error::InvalidChain(format!("singlet product needs even N, got {n_qubits}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // Site 1 is bit 0: |0⟩₁|1⟩₂ is 0b10.
    let pair = StateVector::basis_state(2, 0b10)?
        .scaled(C64::new(h, 0.0))
        .add_scaled(C64::new(-h, 0.0), &StateVector::basis_state(2, 0b01)?)?;
    let mut out = pair.clone();
    for _ in 1..n_qubits / 2 {
        out = StateVector::kron(&out, &pair)?;
    }
    Ok(out)
}

/// A chain with its Hamiltonian and initial state.
#[derive(Debug)]
pub struct PreparedChain {
    pub hamiltonian: Hamiltonian,
    pub initial: StateVector,
    pub kind: InitialStateKind,
    /// `⟨H⟩` of the initial state.
    pub energy: f64,
    /// `‖H|ψ⟩ - E|ψ⟩‖`; the Lanczos residual for a ground state.
    pub residual: f64,
    /// Spectral gap in the ground-state sector, when known.
    pub gap: Option<f64>,
}

impl PreparedChain {
    pub fn new(spec: ChainSpec, kind: InitialStateKind, lanczos: &LanczosConfig) -> Result<Self> {
        let hamiltonian = build_chain(spec)?;
        match kind {
            InitialStateKind::GroundState => {
                let gs = crate::solver::ground_state_in_sector(&hamiltonian, spec.n_qubits / 2, lanczos)?;
                Ok(PreparedChain {
                    hamiltonian,
                    initial: gs.state,
                    kind,
                    energy: gs.energy,
                    residual: gs.residual,
                    gap: Some(gs.gap),
                })
            }
            InitialStateKind::SingletProduct => {
                let initial = singlet_product(spec.n_qubits)?;
                let energy = hamiltonian.energy(&initial)?;
                let hpsi = hamiltonian.apply(&initial)?;
                let residual = hpsi.add_scaled(C64::new(-energy, 0.0), &initial)?.norm();
                Ok(PreparedChain {
                    hamiltonian,
                    initial,
                    kind,
                    energy,
                    residual,
                    gap: None,
                })
            }
        }
    }

    /// Dimerized chain in its ground state.
    pub fn ground_state(n_qubits: usize, delta: f64) -> Result<Self> {
        let hamiltonian = build_chain(ChainSpec::dimerized(n_qubits, delta))?;
        let gs = ground_state(&hamiltonian, LanczosConfig::default().tol)?;
        Ok(PreparedChain {
            hamiltonian,
            initial: gs.state,
            kind: InitialStateKind::GroundState,
            energy: gs.energy,
            residual: gs.residual,
            gap: Some(gs.gap),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Whether the initial state only picks up a phase under evolution.
    pub fn is_eigenstate(&self) -> bool {
        self.kind == InitialStateKind::GroundState
    }

    /// Receiver pair `(N-1, N)`.
    pub fn receiver(&self) -> [usize; 2] {
        let n = self.n_qubits();
        [n - 1, n]
    }

    /// Stationarity flags for the four encoding vectors: only the identity
    /// member of a ground state is stationary.
    pub(crate) fn encoding_flags(&self) -> [Option<f64>; 4] {
        let first = self.is_eigenstate().then_some(self.energy);
        [first, None, None, None]
    }
}

/// Everything needed to run one protocol cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub n_qubits: usize,
    pub delta: f64,
    /// Window end; `None` picks the protocol default.
    pub t_max: Option<f64>,
    pub dt: f64,
    pub init: InitialStateKind,
    pub propagator: PropagatorConfig,
    pub lanczos: LanczosConfig,
}

impl CellSpec {
    pub fn new(n_qubits: usize, delta: f64) -> Self {
        CellSpec {
            n_qubits,
            delta,
            t_max: None,
            dt: 0.05,
            init: InitialStateKind::GroundState,
            propagator: PropagatorConfig::default(),
            lanczos: LanczosConfig::default(),
        }
    }

    /// Grid `[0, t_max]` with the protocol's default window of `factor · N`.
    pub fn grid(&self, factor: f64) -> Result<Vec<f64>> {
        time_grid(self.t_max.unwrap_or(factor * self.n_qubits as f64), self.dt)
    }
}

/// A protocol's result for one cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub protocol: String,
    /// Series sharing one time grid.
    pub series: Vec<TimeSeries>,
    /// Named scalar results in a fixed order.
    pub summary: Vec<(String, f64)>,
    pub peak: Peak,
    /// Residual of the initial state, for traceability.
    pub residual: f64,
    pub diagnostics: Diagnostics,
    /// Set when the window holds no usable peak.
    pub window_exhausted: bool,
}

impl CellOutcome {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// A protocol runnable by name.
pub trait Protocol: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cell: &CellSpec) -> Result<CellOutcome>;
}

/// Name-indexed set of protocols.
pub struct ProtocolRegistry {
    entries: BTreeMap<&'static str, Box<dyn Protocol>>,
}

impl ProtocolRegistry {
    pub fn empty() -> Self {
        ProtocolRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// `classical`, `quantum`, `attach-fm`, `attach-afm`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(classical::ClassicalProtocol));
        r.register(Box::new(quantum::QuantumProtocol));
        r.register(Box::new(attaching::AttachingProtocol(AttachScheme::Fm)));
        r.register(Box::new(attaching::AttachingProtocol(AttachScheme::Afm)));
        r
    }

    /// Adds a protocol, replacing any previous one with the same name.
    pub fn register(&mut self, p: Box<dyn Protocol>) {
        self.entries.insert(p.name(), p);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Protocol> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownProtocol(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for ProtocolRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
