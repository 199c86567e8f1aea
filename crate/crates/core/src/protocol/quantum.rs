//! Remote preparation of a qubit state: the sender rotates site 1 by
//! `R(θ, φ)`, the receiver measures site `N-1` in the σ^z basis and keeps
//! site `N`.
//!
//! For the rotated singlet an outcome `k` on the first qubit leaves the
//! second in
//!
//! ```text
//! ψ₀ = sin(θ/2) e^{-iφ}|0⟩ + cos(θ/2)|1⟩
//! ψ₁ = cos(θ/2)|0⟩ - sin(θ/2) e^{iφ}|1⟩
//! ```
//!
//! and the measurement fidelity is `F^M = Σ_k ⟨k,ψ_k|ρ|k,ψ_k⟩`. Each term
//! already carries the outcome probability, so no separate `p_k` factor is
//! applied.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{CellOutcome, CellSpec, PreparedChain, Protocol};
use crate::analysis::{find_optimal_time, fit_linear, LinearFit, Peak, PeakRule, TimeSeries};
use crate::error::{Error, Result};
use crate::model::ChainSpec;
use crate::quadrature::SphereRule;
use crate::reduce::partial_trace;
use crate::solver::{evolve, LanczosConfig, PropagatorConfig};
use crate::state::{rotation_matrix, Pauli, StateVector};
use crate::trajectory::{encoding_vectors, run_bundle, site_coefficients, CrossTerms, Diagnostics};

/// Default window is `[0, 3N]`.
pub const WINDOW_FACTOR: f64 = 3.0;

/// Best average fidelity reachable without a quantum channel.
pub const CLASSICAL_THRESHOLD: f64 = 2.0 / 3.0;

/// `R₁(θ, φ)|ψ⟩`.
pub fn encode_quantum(psi: &StateVector, theta: f64, phi: f64) -> Result<StateVector> {
    psi.apply_rotation(1, theta, phi)
}

/// Conditional target states `[ψ₀, ψ₁]` of site N.
pub fn target_states(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::from_polar(s, -phi), C64::new(c, 0.0)],
        [C64::new(c, 0.0), -C64::from_polar(s, phi)],
    ]
}

/// `F^M` for a two-site state on `(N-1, N)`, site `N-1` as the high index.
pub fn measurement_fidelity_from_rho(rho: &DMatrix<C64>, theta: f64, phi: f64) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.nrows(),
        });
    }
    let psi = target_states(theta, phi);
    let mut f = 0.0;
    for (k, target) in psi.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                f += (target[i].conj() * rho[(2 * k + i, 2 * k + j)] * target[j]).re;
            }
        }
    }
    Ok(f)
}

/// `F^M(θ, φ, t)` by evolving the encoded state directly.
pub fn measurement_fidelity(
    chain: &PreparedChain,
    theta: f64,
    phi: f64,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<f64> {
    let encoded = encode_quantum(&chain.initial, theta, phi)?;
    let evolved = evolve(&chain.hamiltonian, &encoded, t, cfg)?;
    let rho = partial_trace(&evolved, &chain.receiver())?;
    measurement_fidelity_from_rho(rho.entries(), theta, phi)
}

/// `F^M` at every node of `rule`, from the encoding cross terms.
pub fn fidelity_samples(cross: &CrossTerms, rule: &SphereRule) -> Result<Vec<f64>> {
    rule.nodes()
        .par_iter()
        .map(|n| {
            let rho = cross.combine(&site_coefficients(&rotation_matrix(n.theta, n.phi)));
            measurement_fidelity_from_rho(&rho, n.theta, n.phi)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: f64,
    /// Difference to the coarse companion rule.
    pub error: f64,
}

fn cross_terms_at(chain: &PreparedChain, t: f64, cfg: &PropagatorConfig) -> Result<(CrossTerms, Vec<StateVector>)> {
    let vecs = encoding_vectors(&chain.initial)?;
    let mut out = None;
    run_bundle(&chain.hamiltonian, &vecs, &chain.encoding_flags(), &[t], cfg, |_, _, s| {
        out = Some((CrossTerms::new(s, &chain.receiver())?, s.to_vec()));
        Ok(())
    })?;
    Ok(out.expect("one grid point visited"))
}

/// `∫ F^M dΩ / 4π` at time `t` on `rule`, with an error estimate from the
/// 8 × 16 rule.
pub fn average_fidelity_quadrature(
    chain: &PreparedChain,
    t: f64,
    rule: &SphereRule,
    cfg: &PropagatorConfig,
) -> Result<QuadratureValue> {
    let (cross, _) = cross_terms_at(chain, t, cfg)?;
    quadrature_from_cross(&cross, rule)
}

fn quadrature_from_cross(cross: &CrossTerms, rule: &SphereRule) -> Result<QuadratureValue> {
    let value = rule.combine(&fidelity_samples(cross, rule)?)?;
    let coarse = SphereRule::coarse();
    let rough = coarse.combine(&fidelity_samples(cross, &coarse)?)?;
    Ok(QuadratureValue {
        value,
        error: (value - rough).abs(),
    })
}

/// Correlators entering the closed-form average:
/// `F₁ = ⟨σ^z_{N-1}σ^z_N⟩`, `F₂ = 2⟨φ(t)|σ^z_{N-1}σ^z_N|φ(t)⟩` with
/// `φ(t) = e^{-iHt}σ^-_1|ψ⟩`, and `F₃ = Re⟨φ(t)|σ^z_{N-1}σ^-_N|ψ(t)⟩`.
/// For a ground state `ψ(t) = e^{-iE₀t}|GS⟩` and `F₁` is static.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlators {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// Imaginary part of `⟨φ|σ^zσ^z|φ⟩`, zero up to rounding.
    pub f2_imag: f64,
}

impl Correlators {
    /// `1/2 + (F₂ - F₁)/12 + 2F₃/3`.
    pub fn average_fidelity(&self) -> f64 {
        0.5 + (self.f2 - self.f1) / 12.0 + 2.0 * self.f3 / 3.0
    }
}

/// Correlators from the evolved `|ψ(t)⟩` and `φ(t)`.
pub fn correlators_from_states(psi_t: &StateVector, phi_t: &StateVector) -> Result<Correlators> {
    let n = psi_t.n_qubits();
    let f1 = psi_t.zz_expectation(n - 1, n)?;
    let zz_phi = phi_t.apply_pauli(n, Pauli::Z)?.apply_pauli(n - 1, Pauli::Z)?;
    let f2c = phi_t.inner(&zz_phi)? * 2.0;
    let lowered = psi_t.apply_pauli(n, Pauli::Minus)?.apply_pauli(n - 1, Pauli::Z)?;
    let f3 = phi_t.inner(&lowered)?.re;
    Ok(Correlators {
        f1,
        f2: f2c.re,
        f3,
        f2_imag: f2c.im,
    })
}

pub fn correlators(chain: &PreparedChain, t: f64, cfg: &PropagatorConfig) -> Result<Correlators> {
    let h = &chain.hamiltonian;
    let lowered = chain.initial.apply_pauli(1, Pauli::Minus)?;
    let phi_t = evolve(h, &lowered, t, cfg)?;
    let psi_t = if chain.is_eigenstate() {
        chain.initial.clone().scaled(C64::from_polar(1.0, -chain.energy * t))
    } else {
        evolve(h, &chain.initial, t, cfg)?
    };
    correlators_from_states(&psi_t, &phi_t)
}

/// Closed-form sphere average of `F^M` from the correlators.
pub fn average_fidelity_analytic(chain: &PreparedChain, t: f64, cfg: &PropagatorConfig) -> Result<f64> {
    Ok(correlators(chain, t, cfg)?.average_fidelity())
}

#[derive(Debug, Clone)]
pub struct QuantumSeries {
    /// `F_av^M(t)` by quadrature.
    pub average: TimeSeries,
    /// `F_av^M(t)` from the correlators.
    pub analytic: TimeSeries,
    pub f1: TimeSeries,
    pub f2: TimeSeries,
    pub f3: TimeSeries,
    pub diagnostics: Diagnostics,
}

pub fn quantum_series(
    chain: &PreparedChain,
    grid: &[f64],
    rule: &SphereRule,
    cfg: &PropagatorConfig,
) -> Result<QuantumSeries> {
    let vecs = encoding_vectors(&chain.initial)?;
    let keep = chain.receiver();
    let (mut avg, mut ana, mut f1, mut f2, mut f3) = (vec![], vec![], vec![], vec![], vec![]);
    let diagnostics = run_bundle(&chain.hamiltonian, &vecs, &chain.encoding_flags(), grid, cfg, |_, _, s| {
        let cross = CrossTerms::new(s, &keep)?;
        avg.push(rule.combine(&fidelity_samples(&cross, rule)?)?);
        // Members: ψ, σ^z ψ, σ^+ ψ, σ^- ψ.
        let c = correlators_from_states(&s[0], &s[3])?;
        ana.push(c.average_fidelity());
        f1.push(c.f1);
        f2.push(c.f2);
        f3.push(c.f3);
        Ok(())
    })?;
    let t = grid.to_vec();
    Ok(QuantumSeries {
        average: TimeSeries::new("F_av", t.clone(), avg)?,
        analytic: TimeSeries::new("F_av_analytic", t.clone(), ana)?,
        f1: TimeSeries::new("F1", t.clone(), f1)?,
        f2: TimeSeries::new("F2", t.clone(), f2)?,
        f3: TimeSeries::new("F3", t, f3)?,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelitySample {
    pub theta: f64,
    pub phi: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct QuantumProtocolResult {
    pub series: QuantumSeries,
    pub peak: Peak,
    /// `F_av^M(t*)` by quadrature, re-evaluated at the refined peak time.
    pub value: QuadratureValue,
    /// `F_av^M(t*)` from the correlators.
    pub analytic: f64,
    /// `F^M` at the quadrature nodes at `t*`.
    pub samples: Vec<FidelitySample>,
}

pub fn run_quantum(
    chain: &PreparedChain,
    grid: &[f64],
    cfg: &PropagatorConfig,
) -> Result<QuantumProtocolResult> {
    let rule = SphereRule::standard();
    let series = quantum_series(chain, grid, &rule, cfg)?;
    let peak = find_optimal_time(&series.average, (grid[0], grid[grid.len() - 1]), PeakRule::GlobalMax)?;
    let (cross, states) = cross_terms_at(chain, peak.time, cfg)?;
    let value = quadrature_from_cross(&cross, &rule)?;
    let analytic = correlators_from_states(&states[0], &states[3])?.average_fidelity();
    let samples = rule
        .nodes()
        .iter()
        .zip(fidelity_samples(&cross, &rule)?)
        .map(|(n, f)| FidelitySample {
            theta: n.theta,
            phi: n.phi,
            fidelity: f,
        })
        .collect();
    Ok(QuantumProtocolResult {
        series,
        peak,
        value,
        analytic,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n_qubits: usize,
    pub t_star: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub fit: LinearFit,
    /// Chain length where the fitted line falls to 2/3.
    pub threshold_crossing: Option<f64>,
}

/// Least-squares line through precomputed `(N, F_av^M(t*))` points.
pub fn scaling_fit(points: Vec<ScalingPoint>) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 chain lengths, got {}", points.len())));
    }
    let x: Vec<f64> = points.iter().map(|p| p.n_qubits as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.fidelity).collect();
    let fit = fit_linear(&x, &y)?;
    Ok(ScalingFit {
        threshold_crossing: fit.crossing(CLASSICAL_THRESHOLD),
        points,
        fit,
    })
}

/// Runs the protocol at each N in its default window and fits the optima.
pub fn fidelity_scaling(ns: &[usize], delta: f64, dt: f64, cfg: &PropagatorConfig) -> Result<ScalingFit> {
    let points = ns
        .iter()
        .map(|&n| {
            let chain = PreparedChain::new(
                ChainSpec::dimerized(n, delta),
                super::InitialStateKind::GroundState,
                &LanczosConfig::default(),
            )?;
            let grid = crate::analysis::time_grid(WINDOW_FACTOR * n as f64, dt)?;
            let r = run_quantum(&chain, &grid, cfg)?;
            Ok(ScalingPoint {
                n_qubits: n,
                t_star: r.peak.time,
                fidelity: r.value.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scaling_fit(points)
}

pub(crate) struct QuantumProtocol;

impl Protocol for QuantumProtocol {
    fn name(&self) -> &'static str {
        "quantum"
    }

    fn description(&self) -> &'static str {
        "rotation on site 1, sigma-z measurement on site N-1; Bloch-averaged fidelity of site N"
    }

    fn run(&self, cell: &CellSpec) -> Result<CellOutcome> {
        let chain = PreparedChain::new(ChainSpec::dimerized(cell.n_qubits, cell.delta), cell.init, &cell.lanczos)?;
        let grid = cell.grid(WINDOW_FACTOR)?;
        let r = run_quantum(&chain, &grid, &cell.propagator)?;
        let summary = vec![
            ("t_star".to_string(), r.peak.time),
            ("F_av".to_string(), r.value.value),
            ("F_av_analytic".to_string(), r.analytic),
            ("quadrature_error".to_string(), r.value.error),
            ("F_av_grid".to_string(), r.peak.grid_value),
        ];
        let s = &r.series;
        Ok(CellOutcome {
            protocol: self.name().to_string(),
            series: vec![s.average.clone(), s.analytic.clone(), s.f1.clone(), s.f2.clone(), s.f3.clone()],
            summary,
            window_exhausted: r.peak.exhausted(0.0),
            peak: r.peak,
            residual: chain.residual,
            diagnostics: s.diagnostics,
        })
    }
}
