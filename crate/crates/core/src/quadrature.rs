//! Product rules on the unit sphere: Gauss–Legendre in `cos θ` times the
//! trapezoid rule in `φ`, normalized so that weights sum to one.
//!
//! An `n_θ × n_φ` rule integrates `P_l(cos θ) e^{imφ}` exactly for
//! `l ≤ 2n_θ - 1` and `|m| < n_φ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss–Legendre rule needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<SphereNode>,
}

impl SphereRule {
    pub fn product(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_phi == 0 {
            return Err(Error::InvalidArgument("sphere rule needs at least one φ node".into()));
        }
        let (xs, ws) = gauss_legendre(n_theta)?;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in xs.iter().zip(&ws) {
            let theta = x.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                nodes.push(SphereNode {
                    theta,
                    phi: 2.0 * PI * j as f64 / n_phi as f64,
                    weight: 0.5 * w / n_phi as f64,
                });
            }
        }
        Ok(SphereRule {
            n_theta,
            n_phi,
            nodes,
        })
    }

    /// The 16 × 32 rule used for Bloch-sphere averages.
    pub fn standard() -> Self {
        SphereRule::product(16, 32).expect("fixed rule sizes are valid")
    }

    /// The 8 × 16 companion rule used for error estimates.
    pub fn coarse() -> Self {
        SphereRule::product(8, 16).expect("fixed rule sizes are valid")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn nodes(&self) -> &[SphereNode] {
        &self.nodes
    }

    /// Weighted sum over precomputed node values, in node order.
    pub fn combine(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                found: values.len(),
            });
        }
        Ok(self.nodes.iter().zip(values).map(|(n, v)| n.weight * v).sum())
    }

    /// `∫ f dΩ / 4π`.
    pub fn average<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n.theta, n.phi)).sum()
    }
}

/// Average on the standard rule with the difference to the coarse rule as the
/// error estimate.
pub fn sphere_average_with_error<F: FnMut(f64, f64) -> f64>(mut f: F) -> (f64, f64) {
    let fine = SphereRule::standard().average(&mut f);
    let coarse = SphereRule::coarse().average(&mut f);
    (fine, (fine - coarse).abs())
}
