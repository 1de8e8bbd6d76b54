//! Long-time tail analysis of the survival probability: log-log power-law
//! fits of `S(t) - S(inf)`, the closed-form tail profile, and the crossover
//! distance separating the two universal exponents.

use crate::error::{Error, Result};
use crate::walk::SurvivalTrace;

/// Default margin for the crossover-distance branch assignment; the branch
/// condition is an inequality, so the margin is a convention.
pub const DSTAR_MARGIN: f64 = 0.1;

/// Deterministic multiplicative window jitters used for the exponent
/// uncertainty (no randomness anywhere in the pipeline).
const WINDOW_JITTER: [f64; 3] = [1.0, 1.3, 1.7];

/// Result of a power-law fit of `S(t) - s_inf` on a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Fitted decay exponent `beta` in `S - s_inf ~ t^-beta`.
    pub exponent: f64,
    /// Spread of the exponent over jittered windows.
    pub exponent_err: f64,
    /// Prefactor of the power law.
    pub amplitude: f64,
    pub window: (f64, f64),
    /// RMS residual of the fit in log-log space.
    pub residual: f64,
}

fn fit_loglog(trace: &SurvivalTrace, s_inf: f64, t_lo: f64, t_hi: f64) -> Result<(f64, f64, f64)> {
    if !(t_lo > 0.0) || t_lo >= t_hi {
        return Err(Error::BadFitWindow(format!("bad window [{t_lo}, {t_hi}]")));
    }
    let tau = trace.tau();
    let lo = (t_lo / tau).ceil() as usize;
    let hi = ((t_hi / tau).floor() as usize).min(trace.steps());
    if lo >= hi {
        return Err(Error::BadFitWindow(format!(
            "window [{t_lo}, {t_hi}] contains no recorded steps"
        )));
    }
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut count = 0usize;
    for n in lo..=hi {
        let signal = trace.survival(n) - s_inf;
        if signal <= 0.0 {
            return Err(Error::BadFitWindow(format!(
                "non-positive residual signal at t = {}",
                trace.time(n)
            )));
        }
        let x = trace.time(n).ln();
        let y = signal.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1;
    }
    if count < 8 {
        return Err(Error::BadFitWindow(format!("only {count} points in window")));
    }
    let nf = count as f64;
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::BadFitWindow("degenerate abscissa".into()));
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    let mut ss = 0.0;
    for n in lo..=hi {
        let x = trace.time(n).ln();
        let y = (trace.survival(n) - s_inf).ln();
        ss += (y - slope * x - intercept).powi(2);
    }
    Ok((-slope, intercept.exp(), (ss / nf).sqrt()))
}

/// Least-squares power-law fit of `S(t) - s_inf` against `t` on the window,
/// in log-log space. The exponent uncertainty is the sample spread over a
/// fixed grid of shrunken windows.
pub fn fit_tail(trace: &SurvivalTrace, s_inf: f64, window: (f64, f64)) -> Result<TailFit> {
    let (exponent, amplitude, residual) = fit_loglog(trace, s_inf, window.0, window.1)?;
    let mut variants = Vec::new();
    for a in WINDOW_JITTER {
        for b in WINDOW_JITTER {
            if a == 1.0 && b == 1.0 {
                continue;
            }
            if let Ok((beta, _, _)) = fit_loglog(trace, s_inf, window.0 * a, window.1 / b) {
                variants.push(beta);
            }
        }
    }
    let exponent_err = if variants.is_empty() {
        f64::NAN
    } else {
        let mean = variants.iter().sum::<f64>() / variants.len() as f64;
        let var = variants.iter().map(|b| (b - mean).powi(2)).sum::<f64>()
            / variants.len() as f64;
        var.sqrt().max((mean - exponent).abs())
    };
    Ok(TailFit { exponent, exponent_err, amplitude, window, residual })
}

/// Closed-form late-time tail of `S(t) - S(inf)` for nearest-neighbor-like
/// dispersion: a `t^(-1/2)` envelope with a distance-dependent correction
/// term that turns the tail into `t^(-3/2)` at short distances.
pub fn tail_closed_form(j: f64, tau: f64, n: usize, distance: usize, t: f64) -> f64 {
    let nf = n as f64;
    let g = 8.0 * j * j * t * tau / nf;
    let envelope = std::f64::consts::PI.sqrt() / (2.0 * j * (8.0 * t * tau / nf).sqrt())
        / std::f64::consts::PI;
    let sign = if distance % 2 == 0 { 1.0 } else { -1.0 };
    envelope * (1.0 + sign * (-(distance as f64 * distance as f64) / g).exp())
}

/// Crossover distance `sqrt(8 J^2 t tau / n)`: initial-detector distances
/// well below it decay with exponent 3/2, well above with exponent 1/2.
pub fn d_star(n: usize, j: f64, tau: f64, t: f64) -> f64 {
    (8.0 * j * j * t * tau / n as f64).sqrt()
}

/// Branch assignment for a distance relative to the crossover scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBranch {
    /// `(d / d_star)^2 <= margin`: exponent 3/2.
    ThreeHalves,
    /// `(d / d_star)^2 >= 1 / margin`: exponent 1/2.
    Half,
    /// In between: no clean single power law.
    Crossover,
}

impl TailBranch {
    pub fn label(self) -> &'static str {
        match self {
            TailBranch::ThreeHalves => "t^-3/2",
            TailBranch::Half => "t^-1/2",
            TailBranch::Crossover => "crossover",
        }
    }
}

/// Classify a distance against the crossover scale with the given margin on
/// the squared ratio.
pub fn tail_branch(distance: usize, dstar: f64, margin: f64) -> TailBranch {
    let ratio = (distance as f64 / dstar).powi(2);
    if ratio <= margin {
        TailBranch::ThreeHalves
    } else if ratio >= 1.0 / margin {
        TailBranch::Half
    } else {
        TailBranch::Crossover
    }
}
