//! Real-time propagation `e^{-iHt}|ψ⟩` by short Krylov steps.
//!
//! A state may span several Sz sectors. Its blocks are laid out back to back
//! in one flat vector so that a single Krylov space covers all of them; H is
//! block diagonal, so this is the same as propagating each block on its own
//! with a shared step size.
//!
//! The local error of a step of length `h` built from an `m`-dimensional
//! space is estimated as `β₀ β_m |[e^{-iT_m h}]_{m,1}|`. When the full space
//! does not reach the tolerance the step is halved.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, SectorOperator};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub krylov_dim: usize,
    /// Largest step; longer intervals are split into equal pieces no longer than this.
    pub dt: f64,
    /// Local error tolerance per step, relative to the state norm.
    pub tol: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            krylov_dim: 30,
            dt: 0.05,
            tol: 1e-10,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.krylov_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "krylov_dim must be at least 2, got {}",
                self.krylov_dim
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("step dt must be positive, got {}", self.dt)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Steps shorter than this count as underflow.
const MIN_STEP: f64 = 1e-10;

struct FlatOperator {
    blocks: Vec<(Arc<SectorOperator>, usize)>,
    len: usize,
}

impl FlatOperator {
    fn for_state(h: &Hamiltonian, state: &StateVector) -> Result<Self> {
        if state.n_qubits() != h.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: h.n_qubits(),
                found: state.n_qubits(),
            });
        }
        let mut blocks = Vec::new();
        let mut len = 0;
        for b in state.blocks() {
            blocks.push((h.sector_operator(b.downs())?, len));
            len += b.amplitudes().len();
        }
        Ok(FlatOperator { blocks, len })
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (op, off) in &self.blocks {
            let r = *off..*off + op.dim();
            op.apply(&x[r.clone()], &mut y[r]);
        }
    }
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// First column of `exp(-i T h)` for a real symmetric tridiagonal `T`.
fn expm_tridiag_column(alpha: &[f64], beta: &[f64], h: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let v = &eig.eigenvectors;
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lam)| C64::from_polar(1.0, -lam * h) * v[(0, k)])
        .collect();
    (0..m)
        .map(|i| (0..m).map(|k| phases[k] * v[(i, k)]).sum())
        .collect()
}

/// A single trajectory advanced in place. Keeps its Krylov workspace between
/// steps.
pub struct Trajectory {
    op: FlatOperator,
    template: StateVector,
    psi: Vec<C64>,
    time: f64,
    cfg: PropagatorConfig,
    basis: Vec<Vec<C64>>,
    w: Vec<C64>,
    steps: usize,
    matvecs: usize,
}

impl Trajectory {
    pub fn new(h: &Hamiltonian, state: &StateVector, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate()?;
        let op = FlatOperator::for_state(h, state)?;
        let psi: Vec<C64> = state
            .blocks()
            .iter()
            .flat_map(|b| b.amplitudes().iter().copied())
            .collect();
        let m = cfg.krylov_dim.min(op.len.max(1));
        Ok(Trajectory {
            w: vec![C64::new(0.0, 0.0); op.len],
            basis: (0..m).map(|_| vec![C64::new(0.0, 0.0); op.len]).collect(),
            template: state.clone(),
            op,
            psi,
            time: 0.0,
            cfg: *cfg,
            steps: 0,
            matvecs: 0,
        })
    }

    /// Elapsed evolution time.
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    pub fn norm(&self) -> f64 {
        norm(&self.psi)
    }

    pub fn state(&self) -> StateVector {
        let mut out = self.template.clone();
        let mut off = 0;
        for b in out.blocks_mut() {
            let amps = b.amplitudes_mut();
            let n = amps.len();
            amps.copy_from_slice(&self.psi[off..off + n]);
            off += n;
        }
        out
    }

    /// Evolves to absolute time `t`, which may lie before the current time.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite time {t}")));
        }
        let span = t - self.time;
        if span != 0.0 {
            let pieces = (span.abs() / self.cfg.dt).ceil().max(1.0) as usize;
            let h = span / pieces as f64;
            for _ in 0..pieces {
                self.step(h)?;
            }
        }
        self.time = t;
        Ok(())
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let mut remaining = h;
        while remaining != 0.0 {
            let done = self.substep(remaining)?;
            remaining -= done;
            if remaining.abs() <= 1e-15 * h.abs() {
                break;
            }
        }
        Ok(())
    }

    /// Takes one Krylov step of length at most `h`; returns the length taken.
    fn substep(&mut self, h: f64) -> Result<f64> {
        let beta0 = norm(&self.psi);
        if beta0 == 0.0 {
            return Ok(h);
        }
        let tol = self.cfg.tol;
        let m_max = self.basis.len();
        for (b, p) in self.basis[0].iter_mut().zip(&self.psi) {
            *b = p / beta0;
        }
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        let mut last_b = 0.0;
        let mut dim = 0;
        let mut converged = false;
        for j in 0..m_max {
            self.op.apply(&self.basis[j], &mut self.w);
            self.matvecs += 1;
            alpha.push(cdot(&self.basis[j], &self.w).re);
            for _ in 0..2 {
                for v in &self.basis[..=j] {
                    let c = cdot(v, &self.w);
                    self.w.iter_mut().zip(v).for_each(|(w, v)| *w -= c * v);
                }
            }
            let b = norm(&self.w);
            dim = j + 1;
            last_b = b;
            // Invariant subspace: the projection is exact.
            if b < 1e-12 * (1.0 + alpha.iter().fold(0.0f64, |a, x| a.max(x.abs()))) {
                last_b = 0.0;
                converged = true;
                break;
            }
            let c = expm_tridiag_column(&alpha, &beta, h);
            if b * c[j].norm() <= tol {
                converged = true;
                break;
            }
            if j + 1 < m_max {
                beta.push(b);
                for (dst, w) in self.basis[j + 1].iter_mut().zip(&self.w) {
                    *dst = w / b;
                }
            }
        }

        let mut taken = h;
        let mut coeffs = expm_tridiag_column(&alpha, &beta, taken);
        if !converged {
            loop {
                taken *= 0.5;
                if taken.abs() < MIN_STEP {
                    return Err(Error::StepUnderflow {
                        time: self.time,
                        step: taken.abs(),
                    });
                }
                coeffs = expm_tridiag_column(&alpha, &beta, taken);
                if last_b * coeffs[dim - 1].norm() <= tol {
                    break;
                }
            }
        }

        self.psi.iter_mut().for_each(|p| *p = C64::new(0.0, 0.0));
        for (v, c) in self.basis[..dim].iter().zip(&coeffs) {
            let c = c * beta0;
            self.psi.iter_mut().zip(v).for_each(|(p, v)| *p += c * v);
        }
        self.steps += 1;
        Ok(taken)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite time".into()));
    }
    if grid[0] < 0.0 {
        return Err(Error::InvalidGrid(format!("grid starts at negative time {}", grid[0])));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("times must be ascending".into()));
    }
    Ok(())
}

/// `e^{-iHt}|state⟩` for `t ≥ 0`.
pub fn evolve(
    h: &Hamiltonian,
    state: &StateVector,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<StateVector> {
    check_grid(&[t])?;
    let mut traj = Trajectory::new(h, state, cfg)?;
    traj.advance_to(t)?;
    Ok(traj.state())
}

/// States at every grid time, each continued from the previous one.
pub fn evolve_series(
    h: &Hamiltonian,
    state: &StateVector,
    grid: &[f64],
    cfg: &PropagatorConfig,
) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(grid.len());
    evolve_series_with(h, state, grid, cfg, |_, _, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Streaming form of [`evolve_series`]: `visit(index, time, state)` is called
/// once per grid point in order.
pub fn evolve_series_with<F>(
    h: &Hamiltonian,
    state: &StateVector,
    grid: &[f64],
    cfg: &PropagatorConfig,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &StateVector) -> Result<()>,
{
    check_grid(grid)?;
    let mut traj = Trajectory::new(h, state, cfg)?;
    for (i, &t) in grid.iter().enumerate() {
        traj.advance_to(t)?;
        visit(i, t, &traj.state())?;
    }
    Ok(())
}
