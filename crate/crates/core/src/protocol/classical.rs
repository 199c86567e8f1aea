//! Two classical bits per use: the sender applies `σ^α` (α ∈ {I, x, y, z}) to
//! site 1 and the receiver decodes the pair `(N-1, N)` in the Bell basis.

use num_complex::Complex64 as C64;

use super::{CellOutcome, CellSpec, PreparedChain, Protocol};
use crate::analysis::{find_optimal_time, Peak, PeakRule, TimeSeries};
use crate::density::{holevo_quantity, state_fidelity, BellLabel, DensityMatrix};
use crate::error::Result;
use crate::model::Hamiltonian;
use crate::reduce::partial_trace;
use crate::solver::{evolve_series_with, PropagatorConfig};
use crate::state::StateVector;
use crate::trajectory::{encoding_vectors, run_bundle, site_coefficients, CrossTerms, Diagnostics};

/// Equiprobable inputs.
pub const UNIFORM_PRIORS: [f64; 4] = [0.25; 4];

/// Default window is `[0, 3N]`.
pub const WINDOW_FACTOR: f64 = 3.0;

/// `σ₁^α|ψ⟩`; `α = I` returns the state unchanged.
pub fn encode_classical(psi: &StateVector, alpha: BellLabel) -> Result<StateVector> {
    match alpha.pauli() {
        Some(p) => psi.apply_pauli(1, p),
        None => Ok(psi.clone()),
    }
}

fn label_coefficients(alpha: BellLabel) -> [C64; 4] {
    match alpha.pauli() {
        Some(p) => site_coefficients(&p.matrix()),
        None => [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    }
}

/// Receiver states `ρ^α_{N-1,N}` for all four labels from one set of cross terms.
pub fn receiver_states(cross: &CrossTerms) -> Result<[DensityMatrix; 4]> {
    let make = |a: BellLabel| DensityMatrix::new(cross.combine(&label_coefficients(a)));
    Ok([
        make(BellLabel::I)?,
        make(BellLabel::X)?,
        make(BellLabel::Y)?,
        make(BellLabel::Z)?,
    ])
}

/// Bell fidelities `F^α = ⟨b^α|ρ^α|b^α⟩` in label order I, x, y, z.
pub fn bell_fidelities(states: &[DensityMatrix; 4]) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, a) in BellLabel::ALL.iter().enumerate() {
        out[k] = state_fidelity(&states[k], &a.state())?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ClassicalSeries {
    /// `F^α(t)` in label order I, x, y, z.
    pub fidelity: [TimeSeries; 4],
    /// Prior-weighted mean of the four fidelities.
    pub mean_fidelity: TimeSeries,
    /// Holevo quantity in bits.
    pub holevo: TimeSeries,
    pub diagnostics: Diagnostics,
}

/// All classical figures of merit on a grid, from four evolved vectors.
pub fn classical_series(
    chain: &PreparedChain,
    grid: &[f64],
    priors: &[f64; 4],
    cfg: &PropagatorConfig,
) -> Result<ClassicalSeries> {
    let vecs = encoding_vectors(&chain.initial)?;
    let keep = chain.receiver();
    let mut f = [vec![], vec![], vec![], vec![]];
    let mut mean = Vec::with_capacity(grid.len());
    let mut holevo = Vec::with_capacity(grid.len());
    let diagnostics = run_bundle(&chain.hamiltonian, &vecs, &chain.encoding_flags(), grid, cfg, |_, _, states| {
        let rho = receiver_states(&CrossTerms::new(states, &keep)?)?;
        let fid = bell_fidelities(&rho)?;
        for k in 0..4 {
            f[k].push(fid[k]);
        }
        mean.push(fid.iter().zip(priors).map(|(f, q)| f * q).sum());
        holevo.push(holevo_quantity(&rho, priors)?);
        Ok(())
    })?;
    let t = grid.to_vec();
    let [f0, f1, f2, f3] = f;
    Ok(ClassicalSeries {
        fidelity: [
            TimeSeries::new("F_I", t.clone(), f0)?,
            TimeSeries::new("F_x", t.clone(), f1)?,
            TimeSeries::new("F_y", t.clone(), f2)?,
            TimeSeries::new("F_z", t.clone(), f3)?,
        ],
        mean_fidelity: TimeSeries::new("F_mean", t.clone(), mean)?,
        holevo: TimeSeries::new("holevo", t, holevo)?,
        diagnostics,
    })
}

/// `F^α(t)` by evolving `σ₁^α|ψ⟩` alone and tracing out all but `(N-1, N)`.
pub fn bell_fidelity_series(
    h: &Hamiltonian,
    psi: &StateVector,
    alpha: BellLabel,
    grid: &[f64],
    cfg: &PropagatorConfig,
) -> Result<TimeSeries> {
    let n = h.n_qubits();
    let encoded = encode_classical(psi, alpha)?;
    let target = alpha.state();
    let mut values = Vec::with_capacity(grid.len());
    evolve_series_with(h, &encoded, grid, cfg, |_, _, s| {
        values.push(state_fidelity(&partial_trace(s, &[n - 1, n])?, &target)?);
        Ok(())
    })?;
    TimeSeries::new(format!("F_{}", alpha.name()), grid.to_vec(), values)
}

/// Holevo quantity `C(t)` of the four encodings.
pub fn holevo_series(
    chain: &PreparedChain,
    priors: &[f64; 4],
    grid: &[f64],
    cfg: &PropagatorConfig,
) -> Result<TimeSeries> {
    Ok(classical_series(chain, grid, priors, cfg)?.holevo)
}

/// Capacity and Bell fidelities at one time.
pub fn classical_at(
    chain: &PreparedChain,
    t: f64,
    priors: &[f64; 4],
    cfg: &PropagatorConfig,
) -> Result<(f64, [f64; 4])> {
    let s = classical_series(chain, &[t], priors, cfg)?;
    Ok((s.holevo.values[0], [0, 1, 2, 3].map(|k| s.fidelity[k].values[0])))
}

#[derive(Debug, Clone)]
pub struct ClassicalProtocolResult {
    pub series: ClassicalSeries,
    pub priors: [f64; 4],
    /// Peak of the Holevo quantity.
    pub capacity_peak: Peak,
    /// `C(t*)` re-evaluated at the refined capacity peak.
    pub capacity: f64,
    /// Peak of the prior-weighted mean Bell fidelity.
    pub fidelity_peak: Peak,
    /// `F^α` re-evaluated at the refined fidelity peak.
    pub fidelities: [f64; 4],
}

impl ClassicalProtocolResult {
    /// Distance between the two optimal times.
    pub fn peak_separation(&self) -> f64 {
        (self.capacity_peak.time - self.fidelity_peak.time).abs()
    }
}

pub fn run_classical(
    chain: &PreparedChain,
    grid: &[f64],
    priors: &[f64; 4],
    cfg: &PropagatorConfig,
) -> Result<ClassicalProtocolResult> {
    let series = classical_series(chain, grid, priors, cfg)?;
    let window = (grid[0], grid[grid.len() - 1]);
    let capacity_peak = find_optimal_time(&series.holevo, window, PeakRule::GlobalMax)?;
    let fidelity_peak = find_optimal_time(&series.mean_fidelity, window, PeakRule::GlobalMax)?;
    let (capacity, _) = classical_at(chain, capacity_peak.time, priors, cfg)?;
    let (_, fidelities) = classical_at(chain, fidelity_peak.time, priors, cfg)?;
    Ok(ClassicalProtocolResult {
        series,
        priors: *priors,
        capacity_peak,
        capacity,
        fidelity_peak,
        fidelities,
    })
}

pub(crate) struct ClassicalProtocol;

impl Protocol for ClassicalProtocol {
    fn name(&self) -> &'static str {
        "classical"
    }

    fn description(&self) -> &'static str {
        "Pauli encoding on site 1, Bell decoding on sites N-1, N; Holevo capacity"
    }

    fn run(&self, cell: &CellSpec) -> Result<CellOutcome> {
        let chain = PreparedChain::new(
            crate::model::ChainSpec::dimerized(cell.n_qubits, cell.delta),
            cell.init,
            &cell.lanczos,
        )?;
        let grid = cell.grid(WINDOW_FACTOR)?;
        let r = run_classical(&chain, &grid, &UNIFORM_PRIORS, &cell.propagator)?;
        let mut series: Vec<TimeSeries> = r.series.fidelity.to_vec();
        series.push(r.series.mean_fidelity.clone());
        series.push(r.series.holevo.clone());
        let summary = vec![
            ("t_star".to_string(), r.capacity_peak.time),
            ("capacity".to_string(), r.capacity),
            ("t_star_fidelity".to_string(), r.fidelity_peak.time),
            ("F_I".to_string(), r.fidelities[0]),
            ("F_x".to_string(), r.fidelities[1]),
            ("F_y".to_string(), r.fidelities[2]),
            ("F_z".to_string(), r.fidelities[3]),
            ("peak_separation".to_string(), r.peak_separation()),
        ];
        Ok(CellOutcome {
            protocol: self.name().to_string(),
            series,
            summary,
            window_exhausted: r.capacity_peak.exhausted(0.0),
            peak: r.capacity_peak,
            residual: chain.residual,
            diagnostics: r.series.diagnostics,
        })
    }
}
