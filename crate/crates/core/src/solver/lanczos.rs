//! Ground states by restarted Lanczos with full reorthogonalization.
//!
//! The Heisenberg blocks are real symmetric, so the iteration runs in real
//! arithmetic. Each cycle builds at most `max_basis` vectors and restarts from
//! the current Ritz vector. The start vector is pseudo-random from a fixed
//! seed: a uniform vector over a sector is a member of the maximal-spin
//! multiplet and therefore orthogonal to a singlet ground state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::Magnetization;
use crate::error::{Error, Result};
use crate::model::{Hamiltonian, SectorOperator};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Required residual `‖Hψ - Eψ‖` of the ground state.
    pub tol: f64,
    /// Krylov vectors kept per restart cycle.
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Smallest accepted `E1 - E0` within the sector.
    pub min_gap: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tol: 1e-10,
            max_basis: 60,
            max_restarts: 400,
            seed: 0x5eed_2011,
            min_gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    pub residual: f64,
    /// Lowest energy in the same sector orthogonal to the ground state.
    /// Infinite when the sector is one-dimensional.
    pub first_excited: f64,
    pub gap: f64,
    pub matvecs: usize,
}

/// Ground state in the lowest-|Sz| sector: `Sz = 0` for even N, `Sz = +1/2`
/// (one more up spin than down) for odd N.
pub fn ground_state(h: &Hamiltonian, tol: f64) -> Result<GroundStateResult> {
    let cfg = LanczosConfig {
        tol,
        ..LanczosConfig::default()
    };
    ground_state_in_sector(h, h.n_qubits() / 2, &cfg)
}

/// Ground state restricted to the sector with `downs` down spins.
pub fn ground_state_in_sector(
    h: &Hamiltonian,
    downs: usize,
    cfg: &LanczosConfig,
) -> Result<GroundStateResult> {
    if cfg.max_basis < 2 {
        return Err(Error::InvalidArgument("Lanczos basis must hold at least 2 vectors".into()));
    }
    let op = h.sector_operator(downs)?;
    let dim = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ground = lowest_eigenpair(&op, start, &[], cfg.tol, cfg)?;

    // Second run in the orthogonal complement certifies the gap.
    let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let excited = if dim > 1 {
        Some(lowest_eigenpair(&op, start, &[&ground.vector], cfg.min_gap.max(1e-8), cfg)?)
    } else {
        None
    };
    let first_excited = excited.as_ref().map_or(f64::INFINITY, |e| e.value);
    let gap = first_excited - ground.value;
    if gap < cfg.min_gap {
        return Err(Error::DegenerateGroundState { gap });
    }

    // Fix the global sign so the largest-magnitude amplitude is positive.
    let pivot = ground
        .vector
        .iter()
        .copied()
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    let amps: Vec<C64> = ground.vector.iter().map(|&x| C64::new(sign * x, 0.0)).collect();
    let state = StateVector::from_sector(
        h.n_qubits(),
        Magnetization::from_downs(h.n_qubits(), downs),
        amps,
    )?;
    Ok(GroundStateResult {
        energy: ground.value,
        state,
        residual: ground.residual,
        first_excited,
        gap,
        matvecs: ground.matvecs + excited.map_or(0, |e| e.matvecs),
    })
}

struct Eigenpair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn project_out(v: &mut [f64], deflate: &[&Vec<f64>]) {
    for d in deflate {
        let c = dot(d, v);
        axpy(-c, d, v);
    }
}

/// Lowest eigenvector of a symmetric tridiagonal matrix.
fn lowest_ritz(alpha: &[f64], beta: &[f64]) -> Vec<f64> {
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
    let idx = eig.eigenvalues.imin();
    eig.eigenvectors.column(idx).iter().copied().collect()
}

fn lowest_eigenpair(
    op: &SectorOperator,
    mut x: Vec<f64>,
    deflate: &[&Vec<f64>],
    tol: f64,
    cfg: &LanczosConfig,
) -> Result<Eigenpair> {
    let dim = op.dim();
    let max_basis = cfg.max_basis.min(dim.max(1));
    project_out(&mut x, deflate);
    let n0 = dot(&x, &x).sqrt();
    if n0 < 1e-12 {
        return Err(Error::InvalidArgument("Lanczos start vector vanishes after deflation".into()));
    }
    x.iter_mut().for_each(|v| *v /= n0);

    let mut matvecs = 0;
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;
    for _ in 0..cfg.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let y = loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            project_out(&mut w, deflate);
            alpha.push(dot(&basis[j], &w));
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            let y = lowest_ritz(&alpha, &beta);
            let estimate = b * y[j].abs();
            if estimate < 0.1 * tol || b < 1e-13 || basis.len() >= max_basis {
                break y;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        };

        let mut ritz = vec![0.0; dim];
        for (v, &c) in basis.iter().zip(&y) {
            axpy(c, v, &mut ritz);
        }
        project_out(&mut ritz, deflate);
        let nr = dot(&ritz, &ritz).sqrt();
        ritz.iter_mut().for_each(|v| *v /= nr);

        op.apply(&ritz, &mut w);
        matvecs += 1;
        project_out(&mut w, deflate);
        let value = dot(&ritz, &w);
        axpy(-value, &ritz, &mut w);
        let residual = dot(&w, &w).sqrt();
        last_residual = residual;
        if residual < tol || basis.len() >= dim.saturating_sub(deflate.len()) {
            return Ok(Eigenpair {
                value,
                vector: ritz,
                residual,
                matvecs,
            });
        }
        x = ritz;
    }
    Err(Error::NoConvergence {
        iterations: matvecs,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_chain, ChainSpec};

    #[test]
    fn two_site_singlet() {
        for delta in [0.0, 0.4, 0.9] {
            let h = build_chain(ChainSpec::dimerized(2, delta)).unwrap();
            let gs = ground_state(&h, 1e-12).unwrap();
            assert!((gs.energy + 3.0 * (1.0 + delta)).abs() < 1e-12);
            let s = crate::reduce::partial_trace(&gs.state, &[1, 2]).unwrap();
            let w = crate::density::werner_p(&s).unwrap();
            assert!((w.p - 1.0).abs() < 1e-12);
            assert!((gs.gap - 4.0 * (1.0 + delta)).abs() < 1e-8);
        }
    }

    #[test]
    fn decoupled_dimers() {
        let h = build_chain(ChainSpec::dimerized(4, 1.0)).unwrap();
        let gs = ground_state(&h, 1e-12).unwrap();
        assert!((gs.energy + 12.0).abs() < 1e-12);
        assert!(gs.residual < 1e-10);
        // |ψ⁻⟩₁₂ ⊗ |ψ⁻⟩₃₄
        let w12 = crate::density::werner_p(&crate::reduce::partial_trace(&gs.state, &[1, 2]).unwrap()).unwrap();
        let w34 = crate::density::werner_p(&crate::reduce::partial_trace(&gs.state, &[3, 4]).unwrap()).unwrap();
        assert!((w12.p - 1.0).abs() < 1e-10 && (w34.p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ground_state_is_deterministic() {
        let h = build_chain(ChainSpec::dimerized(8, 0.7)).unwrap();
        let a = ground_state(&h, 1e-10).unwrap();
        let b = ground_state(&h, 1e-10).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.state.to_full().unwrap(), b.state.to_full().unwrap());
    }

    #[test]
    fn degenerate_sector_is_reported() {
        // One-dimensional sector: nothing to compare against.
        let h = build_chain(ChainSpec::uniform_fm(4)).unwrap();
        let gs = ground_state_in_sector(&h, 0, &LanczosConfig::default()).unwrap();
        assert!(gs.gap.is_infinite());
        assert!((gs.energy + 3.0).abs() < 1e-12);

        let h = build_chain(ChainSpec::dimerized(4, 0.5)).unwrap();
        let cfg = LanczosConfig {
            min_gap: 1e6,
            ..LanczosConfig::default()
        };
        assert!(matches!(
            ground_state_in_sector(&h, 2, &cfg),
            Err(Error::DegenerateGroundState { .. })
        ));
    }
}
