//! Several trajectories advanced together over one time grid.
//!
//! A local operation `M` on site 1 is a combination of `I, σ^z, σ^+, σ^-`.
//! Evolving the four vectors `O_a|ψ⟩` once therefore gives the evolved state
//! for every `M`, and the reduced state of any encoding follows from the
//! cross terms `X_ab = Tr_rest |u_a(t)⟩⟨u_b(t)|` as `Σ c_a c_b^* X_ab`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Hamiltonian;
use crate::reduce::SplitState;
use crate::solver::{PropagatorConfig, Trajectory};
use crate::state::{Pauli, SiteMatrix, StateVector};

/// Operator basis for site-1 encodings, in coefficient order.
pub const ENCODING_BASIS: [Pauli; 3] = [Pauli::Z, Pauli::Plus, Pauli::Minus];

/// Coefficients of `m` over `[I, σ^z, σ^+, σ^-]`, with `σ^+ = |0⟩⟨1|`.
pub fn site_coefficients(m: &SiteMatrix) -> [C64; 4] {
    [
        (m[0][0] + m[1][1]) * 0.5,
        (m[0][0] - m[1][1]) * 0.5,
        m[0][1],
        m[1][0],
    ]
}

/// The four vectors `I|ψ⟩, σ^z_1|ψ⟩, σ^+_1|ψ⟩, σ^-_1|ψ⟩`.
pub fn encoding_vectors(psi: &StateVector) -> Result<Vec<StateVector>> {
    let mut out = vec![psi.clone()];
    for p in ENCODING_BASIS {
        out.push(psi.apply_pauli(1, p)?);
    }
    Ok(out)
}

/// One bundle member.
pub enum Member {
    Evolved(Box<Trajectory>),
    /// An eigenstate with known energy; evolves by a phase only.
    Stationary { state: StateVector, energy: f64 },
}

impl Member {
    fn state_at(&self, t: f64) -> StateVector {
        match self {
            Member::Evolved(tr) => tr.state(),
            Member::Stationary { state, energy } => state.clone().scaled(C64::from_polar(1.0, -energy * t)),
        }
    }

    fn advance_to(&mut self, t: f64) -> Result<()> {
        match self {
            Member::Evolved(tr) => tr.advance_to(t),
            Member::Stationary { .. } => Ok(()),
        }
    }

    fn matvecs(&self) -> usize {
        match self {
            Member::Evolved(tr) => tr.matvecs(),
            Member::Stationary { .. } => 0,
        }
    }
}

/// Largest deviations seen along a bundle run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// `max |‖ψ(t)‖ - ‖ψ(0)‖| / ‖ψ(0)‖` over members and grid points.
    pub norm_drift: f64,
    /// `max |⟨H⟩_t - ⟨H⟩_0|` with normalized expectation values.
    pub energy_drift: f64,
    pub matvecs: usize,
}

pub struct Bundle<'h> {
    h: &'h Hamiltonian,
    members: Vec<Member>,
    norms0: Vec<f64>,
    energies0: Vec<Option<f64>>,
    diag: Diagnostics,
}

impl<'h> Bundle<'h> {
    /// Members whose entry in `stationary` is `Some(E)` are treated as
    /// eigenstates with energy `E`.
    pub fn new(
        h: &'h Hamiltonian,
        states: &[StateVector],
        stationary: &[Option<f64>],
        cfg: &PropagatorConfig,
    ) -> Result<Self> {
        if states.len() != stationary.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: stationary.len(),
            });
        }
        let mut members = Vec::with_capacity(states.len());
        let mut norms0 = Vec::new();
        let mut energies0 = Vec::new();
        for (s, e) in states.iter().zip(stationary) {
            members.push(match e {
                Some(energy) => Member::Stationary {
                    state: s.clone(),
                    energy: *energy,
                },
                None => Member::Evolved(Box::new(Trajectory::new(h, s, cfg)?)),
            });
            let n = s.norm();
            norms0.push(n);
            energies0.push(if n > 1e-12 { Some(h.energy(s)?) } else { None });
        }
        Ok(Bundle {
            h,
            members,
            norms0,
            energies0,
            diag: Diagnostics::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Advances every member to `t` in parallel and returns their states.
    pub fn advance_to(&mut self, t: f64) -> Result<Vec<StateVector>> {
        self.members.par_iter_mut().try_for_each(|m| m.advance_to(t))?;
        let states: Vec<StateVector> = self.members.iter().map(|m| m.state_at(t)).collect();
        let checks: Vec<Result<(f64, f64)>> = states
            .par_iter()
            .zip(&self.norms0)
            .zip(&self.energies0)
            .map(|((s, &n0), e0)| {
                let dn = if n0 > 1e-12 { (s.norm() - n0).abs() / n0 } else { s.norm() };
                let de = match e0 {
                    Some(e0) => (self.h.energy(s)? - e0).abs(),
                    None => 0.0,
                };
                Ok((dn, de))
            })
            .collect();
        for c in checks {
            let (dn, de) = c?;
            self.diag.norm_drift = self.diag.norm_drift.max(dn);
            self.diag.energy_drift = self.diag.energy_drift.max(de);
        }
        Ok(states)
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            matvecs: self.members.iter().map(Member::matvecs).sum(),
            ..self.diag
        }
    }
}

/// Runs a bundle over an ascending grid, calling `visit(index, time, states)`
/// at every grid point.
pub fn run_bundle<F>(
    h: &Hamiltonian,
    states: &[StateVector],
    stationary: &[Option<f64>],
    grid: &[f64],
    cfg: &PropagatorConfig,
    mut visit: F,
) -> Result<Diagnostics>
where
    F: FnMut(usize, f64, &[StateVector]) -> Result<()>,
{
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidGrid("times must be ascending from t >= 0".into()));
    }
    let mut bundle = Bundle::new(h, states, stationary, cfg)?;
    for (i, &t) in grid.iter().enumerate() {
        let s = bundle.advance_to(t)?;
        visit(i, t, &s)?;
    }
    Ok(bundle.diagnostics())
}

/// Cross terms `X_ab = Tr_rest |u_a⟩⟨u_b|` on the kept sites for all pairs.
#[derive(Debug, Clone)]
pub struct CrossTerms {
    x: Vec<Vec<DMatrix<C64>>>,
}

impl CrossTerms {
    pub fn new(states: &[StateVector], keep: &[usize]) -> Result<Self> {
        let split: Vec<SplitState> = states
            .par_iter()
            .map(|s| SplitState::new(s, keep))
            .collect::<Result<_>>()?;
        let n = split.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let blocks: Vec<DMatrix<C64>> = pairs
            .par_iter()
            .map(|&(a, b)| split[a].cross(&split[b]))
            .collect::<Result<_>>()?;
        let dim = 1usize << keep.len();
        let mut x = vec![vec![DMatrix::<C64>::zeros(dim, dim); n]; n];
        for (&(a, b), m) in pairs.iter().zip(blocks) {
            x[b][a] = m.adjoint();
            x[a][b] = m;
        }
        Ok(CrossTerms { x })
    }

    pub fn get(&self, a: usize, b: usize) -> &DMatrix<C64> {
        &self.x[a][b]
    }

    /// `Σ c_a c_b^* X_ab`.
    pub fn combine(&self, coeffs: &[C64]) -> DMatrix<C64> {
        let dim = self.x[0][0].nrows();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for (a, ca) in coeffs.iter().enumerate() {
            if *ca == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, cb) in coeffs.iter().enumerate() {
                if *cb == C64::new(0.0, 0.0) {
                    continue;
                }
                out += &self.x[a][b] * (ca * cb.conj());
            }
        }
        out
    }
}
