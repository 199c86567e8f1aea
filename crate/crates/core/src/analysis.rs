//! Time series, peak search and straight-line fits.

use crate::error::{Error, Result};

/// A sampled quantity on an ascending time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidGrid("times must be ascending".into()));
        }
        Ok(TimeSeries {
            label: label.into(),
            times,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Uniform grid `0, dt, 2dt, …` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("window end must be non-negative, got {t_max}")));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeakRule {
    /// Largest sample in the window.
    GlobalMax,
    /// Earliest interior local maximum whose rise above the first sample is at
    /// least `fraction` of the largest rise in the window. Falls back to the
    /// global maximum when there is none.
    FirstPeak { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakStatus {
    Interior,
    /// The maximum sits on the first or last sample; the window should be widened.
    AtBoundary,
    /// Nothing in the window rises above the first sample.
    NoSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined peak time.
    pub time: f64,
    /// Value of the interpolating parabola at `time`.
    pub value: f64,
    /// Grid index of the discrete maximum.
    pub index: usize,
    pub grid_time: f64,
    pub grid_value: f64,
    /// Peak value minus the value at the window start.
    pub rise: f64,
    pub status: PeakStatus,
}

impl Peak {
    /// True when the window holds no usable peak: the maximum is on its edge
    /// or the signal rises by less than `min_rise`.
    pub fn exhausted(&self, min_rise: f64) -> bool {
        self.status != PeakStatus::Interior || self.rise < min_rise
    }
}

/// Locates the optimal time of `series` inside `[t_min, t_max]` and refines it
/// with the parabola through the neighbouring samples. Ties go to the
/// earliest sample.
pub fn find_optimal_time(series: &TimeSeries, window: (f64, f64), rule: PeakRule) -> Result<Peak> {
    let (t_min, t_max) = window;
    let idx: Vec<usize> = (0..series.len())
        .filter(|&i| series.times[i] >= t_min && series.times[i] <= t_max)
        .collect();
    if idx.is_empty() || !(t_min <= t_max) {
        return Err(Error::EmptyWindow { t_min, t_max });
    }
    let t = |k: usize| series.times[idx[k]];
    let v = |k: usize| series.values[idx[k]];
    let n = idx.len();

    let mut best = 0;
    for k in 1..n {
        if v(k) > v(best) {
            best = k;
        }
    }
    let v0 = v(0);
    let full_rise = v(best) - v0;
    if let PeakRule::FirstPeak { fraction } = rule {
        let threshold = v0 + fraction * full_rise;
        if let Some(k) = (1..n.saturating_sub(1)).find(|&k| v(k) >= v(k - 1) && v(k) > v(k + 1) && v(k) >= threshold) {
            best = k;
        }
    }

    let status = if full_rise <= 0.0 {
        PeakStatus::NoSignal
    } else if best == 0 || best == n - 1 {
        PeakStatus::AtBoundary
    } else {
        PeakStatus::Interior
    };

    let (mut time, mut value) = (t(best), v(best));
    if best > 0 && best + 1 < n {
        if let Some((tv, vv)) = parabola_vertex([t(best - 1), t(best), t(best + 1)], [v(best - 1), v(best), v(best + 1)]) {
            time = tv;
            value = vv;
        }
    }
    Ok(Peak {
        time,
        value,
        index: idx[best],
        grid_time: t(best),
        grid_value: v(best),
        rise: v(best) - v0,
        status,
    })
}

/// Vertex of the parabola through three points if it opens downward, clamped
/// to the outer abscissae.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) || !a.is_finite() {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[1] + (xv - x[1]) * (d01 + a * (xv - x[0]));
    Some((xv, yv))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Abscissa where the line reaches `y`; `None` for a flat line.
    pub fn crossing(&self, y: f64) -> Option<f64> {
        (self.slope != 0.0).then(|| (y - self.intercept) / self.slope)
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let scale = x.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1.0);
    if sxx <= 1e-24 * scale * scale * n {
        return Err(Error::DegenerateFit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (slope * a + intercept)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
        r_squared,
    })
}
