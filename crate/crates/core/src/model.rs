//! Heisenberg chains with nearest-neighbour Pauli couplings,
//! `H = Σ_k J_k σ_k · σ_{k+1}` with open boundaries.
//!
//! In the σ^z basis each bond contributes `+J_k` on aligned pairs, `-J_k` on
//! anti-aligned pairs, and `2 J_k` between a pair and its swap. The operator is
//! stored per total-Sz sector as a real CSR matrix and built on first use.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::basis::{Magnetization, SectorBasis, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Rows per rayon task in the sparse product; below twice this it runs serially.
const PAR_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingPattern {
    /// `J(1+δ)` on bonds 1–2, 3–4, …; `J(1-δ)` on 2–3, 4–5, …
    Dimerized,
    /// `+J` on every bond.
    UniformAfm,
    /// `-J` on every bond.
    UniformFm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_qubits: usize,
    /// Energy unit; times are measured in `1/J`.
    pub coupling: f64,
    pub delta: f64,
    pub pattern: CouplingPattern,
}

impl ChainSpec {
    pub fn dimerized(n_qubits: usize, delta: f64) -> Self {
        ChainSpec {
            n_qubits,
            coupling: 1.0,
            delta,
            pattern: CouplingPattern::Dimerized,
        }
    }

    pub fn uniform_afm(n_qubits: usize) -> Self {
        ChainSpec {
            n_qubits,
            coupling: 1.0,
            delta: 0.0,
            pattern: CouplingPattern::UniformAfm,
        }
    }

    pub fn uniform_fm(n_qubits: usize) -> Self {
        ChainSpec {
            n_qubits,
            coupling: 1.0,
            delta: 0.0,
            pattern: CouplingPattern::UniformFm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidChain(msg));
        if self.n_qubits < 1 || self.n_qubits > MAX_QUBITS {
            return bad(format!("N = {} outside 1..={MAX_QUBITS}", self.n_qubits));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return bad(format!("coupling J = {} must be positive", self.coupling));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return bad(format!("dimerization δ = {} outside [0, 1]", self.delta));
        }
        if self.pattern == CouplingPattern::Dimerized && self.n_qubits % 2 != 0 {
            return bad(format!("dimerized chains need even N, got {}", self.n_qubits));
        }
        Ok(())
    }

    /// Bond strengths `J_k` for bonds `k = 1..N-1`.
    pub fn bonds(&self) -> Vec<f64> {
        let j = self.coupling;
        (0..self.n_qubits.saturating_sub(1))
            .map(|k| match self.pattern {
                CouplingPattern::Dimerized if k % 2 == 0 => j * (1.0 + self.delta),
                CouplingPattern::Dimerized => j * (1.0 - self.delta),
                CouplingPattern::UniformAfm => j,
                CouplingPattern::UniformFm => -j,
            })
            .collect()
    }
}

/// Real symmetric sector block in CSR form with the diagonal kept apart.
#[derive(Debug)]
pub struct SectorOperator {
    basis: Arc<SectorBasis>,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SectorOperator {
    fn build(basis: Arc<SectorBasis>, bonds: &[f64]) -> Self {
        let n = basis.len();
        let mut diag = vec![0.0; n];
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, &s) in basis.states().iter().enumerate() {
            for (k, &j) in bonds.iter().enumerate() {
                if j == 0.0 {
                    continue;
                }
                let pair = 0b11u64 << k;
                let bits = s & pair;
                if bits == 0 || bits == pair {
                    diag[i] += j;
                } else {
                    diag[i] -= j;
                    cols.push(basis.rank(s ^ pair) as u32);
                    vals.push(2.0 * j);
                }
            }
            row_ptr.push(cols.len());
        }
        SectorOperator {
            basis,
            diag,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz(&self) -> usize {
        self.diag.len() + self.vals.len()
    }

    #[inline]
    fn row<T>(&self, i: usize, x: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::AddAssign,
    {
        let mut acc = x[i] * self.diag[i];
        for p in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += x[self.cols[p] as usize] * self.vals[p];
        }
        acc
    }

    /// `y = H x` for real or complex vectors over this sector. Each output row
    /// is computed independently, so the result does not depend on threading.
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Send + Sync + std::ops::Mul<f64, Output = T> + std::ops::AddAssign,
    {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        if self.dim() < 2 * PAR_ROWS {
            for (i, out) in y.iter_mut().enumerate() {
                *out = self.row(i, x);
            }
        } else {
            y.par_chunks_mut(PAR_ROWS).enumerate().for_each(|(c, chunk)| {
                let base = c * PAR_ROWS;
                for (off, out) in chunk.iter_mut().enumerate() {
                    *out = self.row(base + off, x);
                }
            });
        }
    }
}

/// Immutable Hamiltonian handle. Sector operators are built lazily and shared.
#[derive(Debug)]
pub struct Hamiltonian {
    spec: ChainSpec,
    bonds: Vec<f64>,
    sectors: Vec<OnceLock<Arc<SectorOperator>>>,
}

/// Builds the Hamiltonian for a validated chain description.
pub fn build_chain(spec: ChainSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    Ok(Hamiltonian {
        bonds: spec.bonds(),
        sectors: (0..=spec.n_qubits).map(|_| OnceLock::new()).collect(),
        spec,
    })
}

impl Hamiltonian {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    /// Operator block for the sector with `downs` down spins.
    pub fn sector_operator(&self, downs: usize) -> Result<Arc<SectorOperator>> {
        let n = self.n_qubits();
        let slot = self.sectors.get(downs).ok_or(Error::EmptySector {
            n_qubits: n,
            magnetization: n as i32 - 2 * downs as i32,
        })?;
        if let Some(op) = slot.get() {
            return Ok(op.clone());
        }
        let basis = SectorBasis::get(n, downs)?;
        Ok(slot
            .get_or_init(|| Arc::new(SectorOperator::build(basis, &self.bonds)))
            .clone())
    }

    /// Basis table of the sector with magnetization `sz` (up minus down count).
    pub fn sector_decompose(&self, sz: i32) -> Result<Arc<SectorBasis>> {
        SectorBasis::for_magnetization(self.n_qubits(), Magnetization(sz))
    }

    /// `H|state⟩`, block by block, without forming the 2^N matrix.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                found: state.n_qubits(),
            });
        }
        let mut out = state.clone();
        for (src, dst) in state.blocks().iter().zip(out.blocks_mut()) {
            let op = self.sector_operator(src.downs())?;
            op.apply(src.amplitudes(), dst.amplitudes_mut());
        }
        Ok(out)
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        let hpsi = self.apply(state)?;
        let num = state.inner(&hpsi)?.re;
        let den = state.norm_sqr();
        if den == 0.0 {
            return Err(Error::InvalidArgument("energy of the zero vector".into()));
        }
        Ok(num / den)
    }
}
