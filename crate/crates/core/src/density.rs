//! Small reduced density matrices (one or two qubits) and the functionals
//! evaluated on them.
//!
//! Two-qubit matrices use the tensor order of the kept-site list: the first
//! kept site is the more significant factor, so the basis runs
//! `|00⟩, |01⟩, |10⟩, |11⟩` with the first character belonging to the first site.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Only the shape (2×2 or 4×4) is checked.
    pub fn from_matrix_unchecked(entries: DMatrix<C64>) -> Result<Self> {
        let dim = entries.nrows();
        if entries.ncols() != dim || !(dim == 2 || dim == 4) {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}x{} (expected 2x2 or 4x4)",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0)))
    }

    /// p|ψ⁻⟩⟨ψ⁻| + (1-p) I/4.
    pub fn werner(p: f64) -> Result<Self> {
        Self::new(werner_matrix(p))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.entries - self.entries.adjoint()).camax();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// ⟨ψ|ρ|ψ⟩ as a complex number.
    pub fn expectation(&self, psi: &[C64]) -> Result<C64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..psi.len() {
            for j in 0..psi.len() {
                acc += psi[i].conj() * self.entries[(i, j)] * psi[j];
            }
        }
        Ok(acc)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }
}

/// Bell-state labels: `|b^α⟩ = (σ^α ⊗ I)|ψ⁻⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellLabel {
    I,
    X,
    Y,
    Z,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::I, BellLabel::X, BellLabel::Y, BellLabel::Z];

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::I => "I",
            BellLabel::X => "x",
            BellLabel::Y => "y",
            BellLabel::Z => "z",
        }
    }

    pub fn pauli(self) -> Option<crate::state::Pauli> {
        use crate::state::Pauli;
        match self {
            BellLabel::I => None,
            BellLabel::X => Some(Pauli::X),
            BellLabel::Y => Some(Pauli::Y),
            BellLabel::Z => Some(Pauli::Z),
        }
    }

    pub fn state(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        // σ acts on the first (most significant) factor of (|01⟩ - |10⟩)/√2.
        match self {
            BellLabel::I => [r(0.0), r(h), r(-h), r(0.0)],
            BellLabel::X => [r(-h), r(0.0), r(0.0), r(h)],
            BellLabel::Y => [i(h), r(0.0), r(0.0), i(h)],
            BellLabel::Z => [r(0.0), r(h), r(h), r(0.0)],
        }
    }
}

pub fn singlet() -> [C64; 4] {
    BellLabel::I.state()
}

fn werner_matrix(p: f64) -> DMatrix<C64> {
    let s = nalgebra::DVector::from_column_slice(&singlet());
    (&s * s.adjoint()).scale(p) + DMatrix::from_diagonal_element(4, 4, C64::new((1.0 - p) / 4.0, 0.0))
}

/// ⟨ψ|ρ|ψ⟩, required to be real within 1e-12.
pub fn state_fidelity(rho: &DensityMatrix, psi: &[C64]) -> Result<f64> {
    let f = rho.expectation(psi)?;
    if f.im.abs() > 1e-12 {
        return Err(Error::InvalidDensityMatrix(format!(
            "fidelity has imaginary residue {:e}",
            f.im
        )));
    }
    Ok(f.re)
}

/// Shannon entropy in bits of a spectrum, dropping values below [`EIGEN_CLAMP`].
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIGEN_CLAMP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.first() {
        if min < -PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(spectrum_entropy(&ev).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerFit {
    pub p: f64,
    /// Frobenius distance between ρ and the Werner matrix with this `p`.
    pub distance: f64,
}

/// Singlet weight `p = (4⟨ψ⁻|ρ|ψ⁻⟩ - 1)/3` of a two-qubit state.
pub fn werner_p(rho: &DensityMatrix) -> Result<WernerFit> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let f = rho.expectation(&singlet())?.re;
    let p = (4.0 * f - 1.0) / 3.0;
    let distance = (rho.entries() - werner_matrix(p)).norm();
    Ok(WernerFit { p, distance })
}

/// Holevo quantity `S(Σ q ρ) - Σ q S(ρ)` in bits.
pub fn holevo_quantity(states: &[DensityMatrix], priors: &[f64]) -> Result<f64> {
    if states.len() != priors.len() || states.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} states but {} priors",
            states.len(),
            priors.len()
        )));
    }
    let total: f64 = priors.iter().sum();
    if priors.iter().any(|&q| q < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("priors must be a distribution, got {priors:?}")));
    }
    let dim = states[0].dim();
    let mut avg = DMatrix::<C64>::zeros(dim, dim);
    let mut conditional = 0.0;
    for (rho, &q) in states.iter().zip(priors) {
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
        if q == 0.0 {
            continue;
        }
        avg += rho.entries().scale(q);
        conditional += q * von_neumann_entropy(rho)?;
    }
    let mixed = von_neumann_entropy(&DensityMatrix::from_matrix_unchecked(avg)?)?;
    Ok((mixed - conditional).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_states_are_orthonormal() {
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let ip: C64 = a.state().iter().zip(b.state()).map(|(x, y)| x.conj() * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - C64::new(expect, 0.0)).norm() < 1e-14, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn fidelity_examples() {
        let s = singlet();
        let rho = DensityMatrix::pure(&s).unwrap();
        assert!((state_fidelity(&rho, &s).unwrap() - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        for b in BellLabel::ALL {
            assert!((state_fidelity(&mixed, &b.state()).unwrap() - 0.25).abs() < 1e-14);
        }
        let w = DensityMatrix::werner(0.9).unwrap();
        assert!((state_fidelity(&w, &s).unwrap() - 0.925).abs() < 1e-14);
        assert!(state_fidelity(&w, &s[..2]).is_err());
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::pure(&BellLabel::Y.state()).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 2.0).abs() < 1e-14);
        // Werner spectrum: {(1+3p)/4, (1-p)/4 ×3}
        let p: f64 = 0.9;
        let (a, b) = ((1.0 + 3.0 * p) / 4.0, (1.0 - p) / 4.0);
        let closed = -a * a.log2() - 3.0 * b * b.log2();
        let s = von_neumann_entropy(&DensityMatrix::werner(p).unwrap()).unwrap();
        assert!((s - closed).abs() < 1e-12, "{s} vs {closed}");
    }

    #[test]
    fn non_psd_input_is_rejected() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        let unchecked = DensityMatrix::from_matrix_unchecked(m).unwrap();
        assert!(von_neumann_entropy(&unchecked).is_err());
    }

    #[test]
    fn werner_examples() {
        let fit = werner_p(&DensityMatrix::pure(&singlet()).unwrap()).unwrap();
        assert!((fit.p - 1.0).abs() < 1e-14 && fit.distance < 1e-14);
        let fit = werner_p(&DensityMatrix::maximally_mixed(4).unwrap()).unwrap();
        assert!(fit.p.abs() < 1e-14 && fit.distance < 1e-14);
        // a product state is far from Werner form
        let mut prod = [C64::new(0.0, 0.0); 4];
        prod[1] = C64::new(1.0, 0.0);
        let fit = werner_p(&DensityMatrix::pure(&prod).unwrap()).unwrap();
        assert!(fit.distance > 0.1);
    }

    #[test]
    fn holevo_limits() {
        let outputs: Vec<_> = BellLabel::ALL
            .iter()
            .map(|b| DensityMatrix::pure(&b.state()).unwrap())
            .collect();
        let c = holevo_quantity(&outputs, &[0.25; 4]).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        let c = holevo_quantity(&outputs, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(c.abs() < 1e-12);
        assert!(holevo_quantity(&outputs, &[0.5; 4]).is_err());
    }
}
