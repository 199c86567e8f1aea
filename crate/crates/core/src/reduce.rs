//! Partial traces down to one or two sites.
//!
//! Each sector block is split by the bits of the kept sites into vectors over
//! the traced-out sites (themselves indexed by a smaller sector basis). Reduced
//! matrices are then plain inner products between the split pieces, which
//! also gives the cross terms `Tr_rest |u⟩⟨v|` needed when an encoded state is
//! a linear combination of separately evolved trajectories.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::basis::{remove_bits, SectorBasis};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Per-element routing of one sector into (kept pattern, rest index).
struct SplitMap {
    /// kept pattern `k` (first kept site most significant) for every element
    pattern: Vec<u8>,
    /// index inside the rest sector for that pattern
    rest_index: Vec<u32>,
    /// rest-sector length per pattern (0 when the pattern is impossible)
    rest_len: Vec<usize>,
}

fn split_map(n: usize, downs: usize, keep: &[usize]) -> Result<Arc<SplitMap>> {
    type Key = (usize, usize, Vec<usize>);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<SplitMap>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, downs, keep.to_vec());
    if let Some(m) = cache.lock().unwrap().get(&key) {
        return Ok(m.clone());
    }

    let basis = SectorBasis::get(n, downs)?;
    let width = keep.len();
    let mut positions: Vec<usize> = keep.iter().map(|s| s - 1).collect();
    positions.sort_unstable();
    let n_rest = n - width;
    let mut rest_len = vec![0usize; 1 << width];
    for (k, len) in rest_len.iter_mut().enumerate() {
        let ones = (k as u32).count_ones() as usize;
        if ones <= downs && downs - ones <= n_rest {
            *len = if n_rest == 0 {
                (downs == ones) as usize
            } else {
                SectorBasis::get(n_rest, downs - ones)?.len()
            };
        }
    }
    let mut pattern = Vec::with_capacity(basis.len());
    let mut rest_index = Vec::with_capacity(basis.len());
    for &s in basis.states() {
        let mut k = 0u8;
        for &site in keep {
            k = (k << 1) | ((s >> (site - 1)) & 1) as u8;
        }
        let rest = remove_bits(s, &positions);
        pattern.push(k);
        rest_index.push(crate::basis::rank_of(rest) as u32);
    }
    let map = Arc::new(SplitMap {
        pattern,
        rest_index,
        rest_len,
    });
    Ok(cache.lock().unwrap().entry(key).or_insert(map).clone())
}

fn check_keep(n_qubits: usize, keep: &[usize]) -> Result<()> {
    if keep.is_empty() || keep.len() > 2 {
        return Err(Error::UnsupportedTraceWidth(keep.len()));
    }
    for &s in keep {
        if s == 0 || s > n_qubits {
            return Err(Error::SiteOutOfRange { site: s, n_qubits });
        }
    }
    if keep.len() == 2 && keep[0] == keep[1] {
        return Err(Error::DuplicateSite(keep[0]));
    }
    Ok(())
}

/// A state split by the kept sites: for every block and kept pattern, the
/// amplitudes over the traced-out sites.
pub struct SplitState {
    n_qubits: usize,
    keep: Vec<usize>,
    /// (rest downs, pattern) -> rest vector
    pieces: Vec<(usize, u8, Vec<C64>)>,
}

impl SplitState {
    pub fn new(state: &StateVector, keep: &[usize]) -> Result<Self> {
        check_keep(state.n_qubits(), keep)?;
        let mut pieces = Vec::new();
        for block in state.blocks() {
            let downs = block.downs();
            let map = split_map(state.n_qubits(), downs, keep)?;
            let mut bufs: Vec<Vec<C64>> = map
                .rest_len
                .iter()
                .map(|&len| vec![C64::new(0.0, 0.0); len])
                .collect();
            for (i, amp) in block.amplitudes().iter().enumerate() {
                bufs[map.pattern[i] as usize][map.rest_index[i] as usize] = *amp;
            }
            for (k, buf) in bufs.into_iter().enumerate() {
                if !buf.is_empty() {
                    let ones = (k as u32).count_ones() as usize;
                    pieces.push((downs - ones, k as u8, buf));
                }
            }
        }
        Ok(SplitState {
            n_qubits: state.n_qubits(),
            keep: keep.to_vec(),
            pieces,
        })
    }

    pub fn dim(&self) -> usize {
        1 << self.keep.len()
    }

    /// `Tr_rest |self⟩⟨other|` as a `dim × dim` matrix.
    pub fn cross(&self, other: &SplitState) -> Result<DMatrix<C64>> {
        if self.n_qubits != other.n_qubits || self.keep != other.keep {
            return Err(Error::InvalidArgument(
                "split states over different registers or kept sites".into(),
            ));
        }
        let dim = self.dim();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for (rd, k, u) in &self.pieces {
            for (rd2, k2, v) in &other.pieces {
                if rd == rd2 {
                    let s: C64 = u.iter().zip(v).map(|(a, b)| a * b.conj()).sum();
                    out[(*k as usize, *k2 as usize)] += s;
                }
            }
        }
        Ok(out)
    }
}

/// `Tr_rest |u⟩⟨v|` over the traced-out sites.
pub fn reduced_cross(u: &StateVector, v: &StateVector, keep: &[usize]) -> Result<DMatrix<C64>> {
    SplitState::new(u, keep)?.cross(&SplitState::new(v, keep)?)
}

/// Reduced density matrix of a normalized state on one or two sites, in the
/// order given by `keep`.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let split = SplitState::new(state, keep)?;
    DensityMatrix::new(split.cross(&split)?)
}
