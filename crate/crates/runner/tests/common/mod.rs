//! Dense reference implementations over the full 2^N basis.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use spinwire_core::{ChainSpec, StateVector, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(axis: char) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let m = match axis {
        'i' => [o, z, z, o],
        'x' => [z, o, o, z],
        'y' => [z, -i, i, z],
        'z' => [o, z, z, -o],
        '+' => [z, o, z, z],
        '-' => [z, z, o, z],
        _ => panic!("unknown axis {axis}"),
    };
    DMatrix::from_row_slice(2, 2, &m)
}

/// `op` on `site` of an `n`-site register. Site 1 is the least significant
/// bit, so it is the rightmost Kronecker factor.
pub fn site_op(n: usize, site: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for k in (1..=n).rev() {
        let f = if k == site { op.clone() } else { pauli('i') };
        out = out.kronecker(&f);
    }
    out
}

pub fn dense_hamiltonian(spec: &ChainSpec) -> DMatrix<C64> {
    let n = spec.n_qubits;
    let dim = 1 << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for (k, j) in spec.bonds().iter().enumerate() {
        for a in ['x', 'y', 'z'] {
            let p = pauli(a);
            h += site_op(n, k + 1, &p) * site_op(n, k + 2, &p) * c(*j, 0.0);
        }
    }
    h
}

pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// Eigenpairs sorted by energy.
pub fn dense_eigen(h: &DMatrix<C64>) -> DenseSpectrum {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    DenseSpectrum { values, vectors }
}

/// Lowest eigenvector restricted to basis states with `downs` set bits.
pub fn dense_sector_ground_state(h: &DMatrix<C64>, n: usize, downs: u32) -> (f64, DVector<C64>) {
    let idx: Vec<usize> = (0..1usize << n).filter(|s| s.count_ones() == downs).collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
    let spec = dense_eigen(&sub);
    let mut full = DVector::<C64>::zeros(1 << n);
    for (a, &s) in idx.iter().enumerate() {
        full[s] = spec.vectors[(a, 0)];
    }
    (spec.values[0], full)
}

/// `exp(-i h t)` by diagonalization.
pub fn dense_expm(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let spec = dense_eigen(h);
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        spec.values.len(),
        spec.values.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    &spec.vectors * phases * spec.vectors.adjoint()
}

pub fn to_dense(s: &StateVector) -> DVector<C64> {
    DVector::from_vec(s.to_full().unwrap())
}

pub fn from_dense(n: usize, v: &DVector<C64>) -> StateVector {
    StateVector::from_full(n, v.as_slice()).unwrap()
}

/// Distance up to a global phase.
pub fn phase_distance(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let ov = a.dotc(b);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { c(1.0, 0.0) };
    (a * phase - b).norm()
}
