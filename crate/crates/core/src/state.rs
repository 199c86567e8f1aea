//! Complex state vectors stored as a direct sum of total-Sz sector blocks.
//!
//! A state confined to one sector has a single block and reports that sector
//! through [`StateVector::sector`]. Local operators that change magnetization
//! (σ^x, σ^y, σ^±, general rotations) move amplitude into the neighbouring
//! sectors, creating blocks as needed, so encodings never fall back to the full
//! 2^N basis.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::basis::{Magnetization, SectorBasis};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// σ⁺ = |0⟩⟨1|, raises the spin.
    Plus,
    /// σ⁻ = |1⟩⟨0|, lowers the spin.
    Minus,
}

/// A 2×2 operator on one site, `m[row][col]` in the `|0⟩, |1⟩` basis.
pub type SiteMatrix = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

impl Pauli {
    pub fn matrix(self) -> SiteMatrix {
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Pauli::Plus => [[ZERO, ONE], [ZERO, ZERO]],
            Pauli::Minus => [[ZERO, ZERO], [ONE, ZERO]],
        }
    }
}

/// The single-qubit rotation used for quantum encoding:
///
/// ```text
/// [ cos(θ/2)          -sin(θ/2) e^{-iφ} ]
/// [ sin(θ/2) e^{iφ}    cos(θ/2)         ]
/// ```
pub fn rotation_matrix(theta: f64, phi: f64) -> SiteMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), -C64::from_polar(s, -phi)],
        [C64::from_polar(s, phi), C64::new(c, 0.0)],
    ]
}

#[derive(Debug, Clone)]
pub struct Block {
    basis: Arc<SectorBasis>,
    amps: Vec<C64>,
}

impl Block {
    pub fn new(basis: Arc<SectorBasis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amps.len(),
            });
        }
        Ok(Block { basis, amps })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn downs(&self) -> usize {
        self.basis.downs()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

/// State of an `n`-qubit register. Blocks are kept sorted by down-spin count
/// and each sector appears at most once.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    blocks: Vec<Block>,
}

impl StateVector {
    /// Computational basis state; bit `k-1` of `bits` is site `k`.
    pub fn basis_state(n_qubits: usize, bits: u64) -> Result<Self> {
        if n_qubits < 64 && bits >> n_qubits != 0 {
            return Err(Error::InvalidArgument(format!(
                "basis index {bits:#b} does not fit {n_qubits} qubits"
            )));
        }
        let basis = SectorBasis::get(n_qubits, bits.count_ones() as usize)?;
        let mut amps = vec![ZERO; basis.len()];
        amps[basis.rank(bits)] = ONE;
        Ok(StateVector {
            n_qubits,
            blocks: vec![Block { basis, amps }],
        })
    }

    /// State restricted to one sector, amplitudes in sector order.
    pub fn from_sector(n_qubits: usize, m: Magnetization, amps: Vec<C64>) -> Result<Self> {
        let basis = SectorBasis::for_magnetization(n_qubits, m)?;
        Ok(StateVector {
            n_qubits,
            blocks: vec![Block::new(basis, amps)?],
        })
    }

    /// Splits a full 2^N amplitude array into sector blocks. Sectors whose
    /// amplitudes are all exactly zero are omitted.
    pub fn from_full(n_qubits: usize, full: &[C64]) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 26 {
            return Err(Error::InvalidArgument(format!(
                "full-basis construction limited to 1..=26 qubits, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        if full.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: full.len(),
            });
        }
        let mut blocks = Vec::new();
        for downs in 0..=n_qubits {
            let basis = SectorBasis::get(n_qubits, downs)?;
            let amps: Vec<C64> = basis.states().iter().map(|&s| full[s as usize]).collect();
            if amps.iter().any(|a| *a != ZERO) {
                blocks.push(Block { basis, amps });
            }
        }
        if blocks.is_empty() {
            // keep a representable zero vector
            let basis = SectorBasis::get(n_qubits, 0)?;
            blocks.push(Block { basis, amps: vec![ZERO] });
        }
        Ok(StateVector { n_qubits, blocks })
    }

    pub(crate) fn from_blocks(n_qubits: usize, mut blocks: Vec<Block>) -> Self {
        blocks.sort_by_key(|b| b.downs());
        debug_assert!(blocks.windows(2).all(|w| w[0].downs() < w[1].downs()));
        StateVector { n_qubits, blocks }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// Magnetization if the state occupies exactly one sector.
    pub fn sector(&self) -> Option<Magnetization> {
        match self.blocks.as_slice() {
            [b] => Some(b.basis.magnetization()),
            _ => None,
        }
    }

    /// Number of stored amplitudes.
    pub fn stored_len(&self) -> usize {
        self.blocks.iter().map(|b| b.amps.len()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.amps.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale(C64::new(1.0 / n, 0.0));
        }
        self
    }

    pub fn scale(&mut self, factor: C64) {
        for b in &mut self.blocks {
            for a in &mut b.amps {
                *a *= factor;
            }
        }
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.scale(factor);
        self
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_register(other)?;
        let mut acc = ZERO;
        for a in &self.blocks {
            if let Some(b) = other.block(a.downs()) {
                acc += a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum::<C64>();
            }
        }
        Ok(acc)
    }

    pub fn block(&self, downs: usize) -> Option<&Block> {
        self.blocks
            .binary_search_by_key(&downs, |b| b.downs())
            .ok()
            .map(|i| &self.blocks[i])
    }

    /// Returns `self + factor * other`, merging sector sets.
    pub fn add_scaled(&self, factor: C64, other: &StateVector) -> Result<StateVector> {
        self.check_same_register(other)?;
        let mut acc = SectorAccumulator::new(self.n_qubits);
        for b in &self.blocks {
            acc.add(b.basis.clone(), |out| {
                out.iter_mut().zip(&b.amps).for_each(|(o, a)| *o += a)
            });
        }
        for b in &other.blocks {
            acc.add(b.basis.clone(), |out| {
                out.iter_mut().zip(&b.amps).for_each(|(o, a)| *o += factor * a)
            });
        }
        Ok(acc.finish())
    }

    /// Amplitude of a full-basis index.
    pub fn amplitude(&self, bits: u64) -> C64 {
        let downs = bits.count_ones() as usize;
        match self.block(downs) {
            Some(b) => b.basis.index_of(bits).map(|i| b.amps[i]).unwrap_or(ZERO),
            None => ZERO,
        }
    }

    /// Dense 2^N amplitude array.
    pub fn to_full(&self) -> Result<Vec<C64>> {
        if self.n_qubits > 26 {
            return Err(Error::InvalidArgument("full basis too large".into()));
        }
        let mut out = vec![ZERO; 1usize << self.n_qubits];
        for b in &self.blocks {
            for (i, &s) in b.basis.states().iter().enumerate() {
                out[s as usize] = b.amps[i];
            }
        }
        Ok(out)
    }

    /// True when every stored amplitude has the popcount of its block.
    /// Holds by construction; exposed for tests.
    pub fn sectors_consistent(&self) -> bool {
        self.blocks.iter().all(|b| {
            b.amps.len() == b.basis.len()
                && b.basis.states().iter().all(|s| s.count_ones() as usize == b.downs())
        })
    }

    /// Tensor product with `low` on sites `1..=low.n` and `high` on the rest.
    pub fn kron(low: &StateVector, high: &StateVector) -> Result<StateVector> {
        let n = low.n_qubits + high.n_qubits;
        if n > crate::basis::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("product register of {n} qubits")));
        }
        let mut acc = SectorAccumulator::new(n);
        for lb in &low.blocks {
            for hb in &high.blocks {
                let basis = SectorBasis::get(n, lb.downs() + hb.downs())?;
                let target = basis.clone();
                acc.add(basis, |out| {
                    for (j, &hs) in hb.basis.states().iter().enumerate() {
                        for (i, &ls) in lb.basis.states().iter().enumerate() {
                            let s = ls | (hs << low.n_qubits);
                            out[target.rank(s)] += lb.amps[i] * hb.amps[j];
                        }
                    }
                });
            }
        }
        Ok(acc.finish())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_qubits {
            return Err(Error::SiteOutOfRange {
                site,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_same_register(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies an arbitrary 2×2 operator to one site.
    ///
    /// Diagonal entries act within each block; `m[0][1]` (|0⟩⟨1|) moves
    /// amplitude to the sector with one fewer down spin and `m[1][0]` to the
    /// sector with one more. Exactly-zero entries are skipped, so σ^z and
    /// diagonal operators never create new blocks.
    pub fn apply_site_matrix(&self, site: usize, m: &SiteMatrix) -> Result<StateVector> {
        self.check_site(site)?;
        let mask = 1u64 << (site - 1);
        let mut acc = SectorAccumulator::new(self.n_qubits);
        for b in &self.blocks {
            let d = b.downs();
            if m[0][0] != ZERO || m[1][1] != ZERO {
                acc.add(b.basis.clone(), |out| {
                    for (i, &s) in b.basis.states().iter().enumerate() {
                        let c = if s & mask == 0 { m[0][0] } else { m[1][1] };
                        out[i] += c * b.amps[i];
                    }
                });
            }
            if m[0][1] != ZERO && d > 0 {
                let target = SectorBasis::get(self.n_qubits, d - 1)?;
                let t = target.clone();
                acc.add(target, |out| {
                    for (i, &s) in b.basis.states().iter().enumerate() {
                        if s & mask != 0 {
                            out[t.rank(s ^ mask)] += m[0][1] * b.amps[i];
                        }
                    }
                });
            }
            if m[1][0] != ZERO && d < self.n_qubits {
                let target = SectorBasis::get(self.n_qubits, d + 1)?;
                let t = target.clone();
                acc.add(target, |out| {
                    for (i, &s) in b.basis.states().iter().enumerate() {
                        if s & mask == 0 {
                            out[t.rank(s | mask)] += m[1][0] * b.amps[i];
                        }
                    }
                });
            }
        }
        Ok(acc.finish())
    }

    /// σ_site^axis |self⟩. σ^± results are generally unnormalized (possibly zero).
    pub fn apply_pauli(&self, site: usize, axis: Pauli) -> Result<StateVector> {
        self.apply_site_matrix(site, &axis.matrix())
    }

    pub fn apply_rotation(&self, site: usize, theta: f64, phi: f64) -> Result<StateVector> {
        self.apply_site_matrix(site, &rotation_matrix(theta, phi))
    }

    /// ⟨self| σ^z_a σ^z_b |self⟩ for two distinct sites.
    pub fn zz_expectation(&self, a: usize, b: usize) -> Result<f64> {
        self.check_site(a)?;
        self.check_site(b)?;
        let (ma, mb) = (1u64 << (a - 1), 1u64 << (b - 1));
        Ok(self
            .blocks
            .iter()
            .flat_map(|blk| blk.basis.states().iter().zip(&blk.amps))
            .map(|(&s, amp)| {
                let sign = if ((s & ma != 0) as u8 ^ (s & mb != 0) as u8) == 0 { 1.0 } else { -1.0 };
                sign * amp.norm_sqr()
            })
            .sum())
    }
}

/// Collects contributions per sector and assembles a sorted [`StateVector`].
pub(crate) struct SectorAccumulator {
    n_qubits: usize,
    slots: Vec<Option<Block>>,
}

impl SectorAccumulator {
    pub(crate) fn new(n_qubits: usize) -> Self {
        SectorAccumulator {
            n_qubits,
            slots: (0..=n_qubits).map(|_| None).collect(),
        }
    }

    pub(crate) fn add(&mut self, basis: Arc<SectorBasis>, f: impl FnOnce(&mut [C64])) {
        let d = basis.downs();
        let slot = self.slots[d].get_or_insert_with(|| Block {
            amps: vec![ZERO; basis.len()],
            basis,
        });
        f(&mut slot.amps);
    }

    pub(crate) fn finish(self) -> StateVector {
        let mut blocks: Vec<Block> = self.slots.into_iter().flatten().collect();
        if blocks.is_empty() {
            let basis = SectorBasis::get(self.n_qubits, 0).expect("n_qubits already validated");
            blocks.push(Block { basis, amps: vec![ZERO] });
        }
        StateVector::from_blocks(self.n_qubits, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn singlet() -> StateVector {
        // (|01⟩ - |10⟩)/√2 with site 1 first: |01⟩ has site 2 set.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::basis_state(2, 0b10)
            .unwrap()
            .add_scaled(C64::new(-1.0, 0.0), &StateVector::basis_state(2, 0b01).unwrap())
            .unwrap()
            .scaled(C64::new(h, 0.0))
    }

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        let d = a.add_scaled(C64::new(-1.0, 0.0), b).unwrap();
        d.norm() < tol
    }

    #[test]
    fn sigma_z_fixes_up_state() {
        let up = StateVector::basis_state(1, 0).unwrap();
        let out = up.apply_pauli(1, Pauli::Z).unwrap();
        assert!(close(&out, &up, 1e-15));
        assert_eq!(out.sector(), Some(Magnetization(1)));
    }

    #[test]
    fn sigma_x_is_an_involution_and_promotes_sectors() {
        let s = singlet();
        assert_eq!(s.sector(), Some(Magnetization(0)));
        let once = s.apply_pauli(1, Pauli::X).unwrap();
        assert_eq!(once.sector(), None);
        assert_eq!(once.blocks().len(), 2);
        let twice = once.apply_pauli(1, Pauli::X).unwrap();
        assert!(close(&twice, &s, 1e-14));
    }

    #[test]
    fn sigma_y_matches_its_matrix() {
        // σ^y|0⟩ = i|1⟩
        let up = StateVector::basis_state(1, 0).unwrap();
        let out = up.apply_pauli(1, Pauli::Y).unwrap();
        assert!((out.amplitude(1) - I).norm() < 1e-15);
        assert_eq!(out.amplitude(0), ZERO);
    }

    #[test]
    fn ladder_operators_can_annihilate() {
        let up = StateVector::basis_state(3, 0).unwrap();
        assert_eq!(up.apply_pauli(2, Pauli::Plus).unwrap().norm(), 0.0);
        let down = up.apply_pauli(2, Pauli::Minus).unwrap();
        assert!((down.amplitude(0b010) - ONE).norm() < 1e-15);
    }

    #[test]
    fn rotation_edge_cases() {
        let s = singlet();
        for phi in [0.0, 0.3, 2.0, -1.0] {
            let r = s.apply_rotation(1, 0.0, phi).unwrap();
            assert!(close(&r, &s, 1e-14));
        }
        let up = StateVector::basis_state(1, 0).unwrap();
        let flipped = up.apply_rotation(1, PI, 0.0).unwrap();
        assert!((flipped.amplitude(1).norm() - 1.0).abs() < 1e-14);
        assert!(flipped.amplitude(0).norm() < 1e-15);
    }

    #[test]
    fn rotation_then_adjoint_is_identity() {
        let s = singlet().apply_pauli(2, Pauli::X).unwrap();
        let (theta, phi) = (1.1, -0.7);
        let m = rotation_matrix(theta, phi);
        let adj = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
        let back = s
            .apply_rotation(2, theta, phi)
            .unwrap()
            .apply_site_matrix(2, &adj)
            .unwrap();
        assert!(close(&back, &s, 1e-12));
    }

    #[test]
    fn site_bounds_are_checked() {
        let s = singlet();
        assert_eq!(
            s.apply_pauli(0, Pauli::X).unwrap_err(),
            Error::SiteOutOfRange { site: 0, n_qubits: 2 }
        );
        assert!(s.apply_rotation(3, 0.1, 0.2).is_err());
    }

    #[test]
    fn kron_places_low_register_on_low_sites() {
        let low = StateVector::basis_state(2, 0b01).unwrap();
        let high = StateVector::basis_state(3, 0b100).unwrap();
        let p = StateVector::kron(&low, &high).unwrap();
        assert_eq!(p.n_qubits(), 5);
        assert!((p.amplitude(0b10001) - ONE).norm() < 1e-15);
        assert!(p.sectors_consistent());
    }

    #[test]
    fn full_round_trip() {
        let s = singlet().apply_rotation(1, 0.4, 1.3).unwrap();
        let full = s.to_full().unwrap();
        let back = StateVector::from_full(2, &full).unwrap();
        assert!(close(&back, &s, 1e-15));
    }

    #[test]
    fn zz_on_singlet_is_minus_one() {
        assert!((singlet().zz_expectation(1, 2).unwrap() + 1.0).abs() < 1e-14);
    }
}
