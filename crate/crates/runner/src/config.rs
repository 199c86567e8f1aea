//! Sweep configuration.
//!
//! Config files are flat TOML; every key below is optional except `protocol`
//! and `n`, and unknown keys are rejected:
//!
//! ```toml
//! protocol = ["quantum"]     # classical | quantum | attach-fm | attach-afm
//! n = [6, 8, 10, 12]
//! delta = [0.7]
//! t_max = 36.0               # omit for the protocol default window
//! dt = 0.05
//! init = "gs"                # gs | singlets
//! ground_tol = 1e-10
//! krylov_dim = 30
//! krylov_tol = 1e-10
//! out = "runs/quantum"
//! jobs = 4
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use spinwire_core::solver::LanczosConfig;
use spinwire_core::{CellSpec, InitialStateKind, PropagatorConfig, ProtocolRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub protocol: Vec<String>,
    pub n: Vec<usize>,
    #[serde(default = "default_delta")]
    pub delta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_init")]
    pub init: String,
    #[serde(default = "default_tol")]
    pub ground_tol: f64,
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    #[serde(default = "default_tol")]
    pub krylov_tol: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_delta() -> Vec<f64> {
    vec![0.7]
}

fn default_dt() -> f64 {
    PropagatorConfig::default().dt
}

fn default_init() -> String {
    InitialStateKind::GroundState.name().to_string()
}

fn default_tol() -> f64 {
    1e-10
}

fn default_krylov_dim() -> usize {
    PropagatorConfig::default().krylov_dim
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_jobs() -> usize {
    1
}

fn one_or_many<'de, D>(d: D) -> Result<Vec<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

/// One `(protocol, N, δ)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CellKey {
    pub protocol: String,
    pub n: usize,
    pub delta: f64,
}

impl CellKey {
    /// File stem for the cell's checkpoint.
    pub fn stem(&self, init: &str) -> String {
        format!("{}-n{}-d{:.6}-{}", self.protocol, self.n, self.delta, init)
    }
}

impl SweepConfig {
    pub fn new(protocol: &[&str], n: &[usize], delta: &[f64]) -> Self {
        SweepConfig {
            protocol: protocol.iter().map(|s| s.to_string()).collect(),
            n: n.to_vec(),
            delta: delta.to_vec(),
            t_max: None,
            dt: default_dt(),
            init: default_init(),
            ground_tol: default_tol(),
            krylov_dim: default_krylov_dim(),
            krylov_tol: default_tol(),
            out: default_out(),
            jobs: default_jobs(),
        }
    }

    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let cfg: SweepConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn init_kind(&self) -> anyhow::Result<InitialStateKind> {
        Ok(InitialStateKind::parse(&self.init)?)
    }

    /// Checks everything that can be checked without running a solver.
    pub fn validate(&self, registry: &ProtocolRegistry) -> anyhow::Result<()> {
        if self.protocol.is_empty() {
            bail!("protocol list is empty");
        }
        for p in &self.protocol {
            registry.get(p)?;
        }
        self.validate_grid()
    }

    /// [`validate`](Self::validate) without the protocol list.
    pub fn validate_grid(&self) -> anyhow::Result<()> {
        if self.n.is_empty() {
            bail!("N list is empty");
        }
        if self.delta.is_empty() {
            bail!("delta list is empty");
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            bail!("N must be at least 2, got {n}");
        }
        if let Some(d) = self.delta.iter().find(|d| !d.is_finite() || d.abs() >= 1.0) {
            bail!("delta must lie in (-1, 1), got {d}");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            bail!("dt must be positive, got {}", self.dt);
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                bail!("empty time grid: t_max must be positive, got {t}");
            }
            if t < self.dt {
                bail!("empty time grid: t_max = {t} is shorter than dt = {}", self.dt);
            }
        }
        if !(self.ground_tol > 0.0) || !(self.krylov_tol > 0.0) {
            bail!("solver tolerances must be positive");
        }
        if self.krylov_dim < 2 {
            bail!("krylov_dim must be at least 2");
        }
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        self.init_kind()?;
        Ok(())
    }

    /// Cells in protocol, N, δ order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for p in &self.protocol {
            for &n in &self.n {
                for &delta in &self.delta {
                    out.push(CellKey {
                        protocol: p.clone(),
                        n,
                        delta,
                    });
                }
            }
        }
        out
    }

    pub fn cell_spec(&self, key: &CellKey) -> anyhow::Result<CellSpec> {
        let propagator = PropagatorConfig {
            krylov_dim: self.krylov_dim,
            dt: PropagatorConfig::default().dt.min(self.dt),
            tol: self.krylov_tol,
        };
        propagator.validate()?;
        Ok(CellSpec {
            n_qubits: key.n,
            delta: key.delta,
            t_max: self.t_max,
            dt: self.dt,
            init: self.init_kind()?,
            propagator,
            lanczos: LanczosConfig {
                tol: self.ground_tol,
                ..LanczosConfig::default()
            },
        })
    }

    /// Every setting that changes a cell's numbers. Checkpoints from a run
    /// with a different fingerprint are recomputed.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}|t_max={:?}|dt={:e}|init={}|ground_tol={:e}|krylov_dim={}|krylov_tol={:e}",
            env!("CARGO_PKG_VERSION"),
            self.t_max,
            self.dt,
            self.init,
            self.ground_tol,
            self.krylov_dim,
            self.krylov_tol
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = SweepConfig::from_toml_str("protocol = \"quantum\"\nn = [6, 8]\n").unwrap();
        assert_eq!(cfg.protocol, vec!["quantum"]);
        assert_eq!(cfg.delta, vec![0.7]);
        assert_eq!(cfg.dt, 0.05);
        assert_eq!(cfg.jobs, 1);
        cfg.validate(&ProtocolRegistry::builtin()).unwrap();
        assert_eq!(cfg.cells().len(), 2);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = SweepConfig::new(&["classical", "attach-fm"], &[6], &[0.3, 0.7]);
        cfg.t_max = Some(12.5);
        let back = SweepConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let reg = ProtocolRegistry::builtin();
        let mut cfg = SweepConfig::new(&["quantum"], &[6], &[0.7]);
        cfg.dt = 0.0;
        assert!(cfg.validate(&reg).is_err());
        let mut cfg = SweepConfig::new(&["teleport"], &[6], &[0.7]);
        assert!(cfg.validate(&reg).is_err());
        cfg.protocol = vec!["quantum".into()];
        cfg.init = "neel".into();
        assert!(cfg.validate(&reg).is_err());
        let cfg = SweepConfig::new(&["quantum"], &[], &[0.7]);
        assert!(cfg.validate(&reg).is_err());
    }

    #[test]
    fn cell_order_is_protocol_then_n_then_delta() {
        let cfg = SweepConfig::new(&["quantum", "classical"], &[6, 8], &[0.5, 0.7]);
        let keys: Vec<_> = cfg.cells().iter().map(|k| k.stem("gs")).collect();
        assert_eq!(keys[0], "quantum-n6-d0.500000-gs");
        assert_eq!(keys[3], "quantum-n8-d0.700000-gs");
        assert_eq!(keys[4], "classical-n6-d0.500000-gs");
    }
}
