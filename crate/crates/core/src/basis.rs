//! Computational-basis bookkeeping and total-Sz sectors.
//!
//! Site `k` (1-based) is stored in bit `k - 1` of a basis index. A clear bit is
//! `|0⟩` (spin up, σ^z = +1) and a set bit is `|1⟩` (spin down). A sector is
//! labelled internally by its number of down spins; the public quantum number
//! is the magnetization `n_up - n_down`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest register this crate will index. Sector indices are stored as `u32`.
pub const MAX_QUBITS: usize = 30;

/// Total-Sz quantum number in units of ħ/2: number of up spins minus down spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Magnetization(pub i32);

impl Magnetization {
    pub fn from_downs(n_qubits: usize, downs: usize) -> Self {
        Magnetization(n_qubits as i32 - 2 * downs as i32)
    }

    /// Number of down spins, or `None` if the value is not reachable with `n_qubits`.
    pub fn downs(self, n_qubits: usize) -> Option<usize> {
        let n = n_qubits as i32;
        if self.0.abs() > n || (n - self.0) % 2 != 0 {
            return None;
        }
        Some(((n - self.0) / 2) as usize)
    }
}

fn binomial_table() -> &'static [[u64; 65]; 65] {
    static TABLE: OnceLock<Box<[[u64; 65]; 65]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0u64; 65]; 65]);
        for n in 0..65 {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1].saturating_add(if k <= n - 1 { t[n - 1][k] } else { 0 });
            }
        }
        t
    })
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        0
    } else {
        binomial_table()[n][k]
    }
}

/// Basis states of one sector, in ascending numeric order.
#[derive(Debug)]
pub struct SectorBasis {
    n_qubits: usize,
    downs: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    fn build(n_qubits: usize, downs: usize) -> Self {
        let size = binomial(n_qubits, downs) as usize;
        let mut states = Vec::with_capacity(size);
        if downs == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates fixed-popcount words in increasing order.
            let mut s: u64 = (1u64 << downs) - 1;
            let limit = 1u64 << n_qubits;
            while s < limit {
                states.push(s);
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(states.len(), size);
        SectorBasis { n_qubits, downs, states }
    }

    /// Shared, lazily built table for `(n_qubits, downs)`.
    pub fn get(n_qubits: usize, downs: usize) -> Result<Arc<SectorBasis>> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "register size {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if downs > n_qubits {
            return Err(Error::EmptySector {
                n_qubits,
                magnetization: n_qubits as i32 - 2 * downs as i32,
            });
        }
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SectorBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().unwrap().get(&(n_qubits, downs)) {
            return Ok(b.clone());
        }
        // Built outside the lock; a concurrent duplicate build is harmless.
        let built = Arc::new(SectorBasis::build(n_qubits, downs));
        Ok(cache
            .lock()
            .unwrap()
            .entry((n_qubits, downs))
            .or_insert(built)
            .clone())
    }

    pub fn for_magnetization(n_qubits: usize, m: Magnetization) -> Result<Arc<SectorBasis>> {
        let downs = m.downs(n_qubits).ok_or(Error::EmptySector {
            n_qubits,
            magnetization: m.0,
        })?;
        Self::get(n_qubits, downs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn downs(&self) -> usize {
        self.downs
    }

    pub fn magnetization(&self) -> Magnetization {
        Magnetization::from_downs(self.n_qubits, self.downs)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Full-basis index of sector element `i`.
    #[inline]
    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    /// Sector position of a full-basis index with the right popcount.
    ///
    /// Uses the combinatorial number system: colex rank equals numeric rank
    /// among words of fixed popcount.
    #[inline]
    pub fn rank(&self, state: u64) -> usize {
        debug_assert_eq!(state.count_ones() as usize, self.downs);
        rank_of(state)
    }

    /// Like [`rank`](Self::rank) but returns `None` for states outside the sector.
    pub fn index_of(&self, state: u64) -> Option<usize> {
        if state.count_ones() as usize != self.downs || state >> self.n_qubits != 0 {
            return None;
        }
        Some(rank_of(state))
    }
}

#[inline]
pub(crate) fn rank_of(mut state: u64) -> usize {
    let table = binomial_table();
    let mut rank = 0u64;
    let mut k = 1;
    while state != 0 {
        let p = state.trailing_zeros() as usize;
        rank += table[p][k];
        k += 1;
        state &= state - 1;
    }
    rank as usize
}

/// Removes the bits at `positions` (ascending) from `state`, compacting the rest.
#[inline]
pub(crate) fn remove_bits(state: u64, positions: &[usize]) -> u64 {
    let mut out = state;
    for &p in positions.iter().rev() {
        let low = out & ((1u64 << p) - 1);
        let high = out >> (p + 1);
        out = low | (high << p);
    }
    out
}
