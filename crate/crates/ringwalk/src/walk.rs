//! Stroboscopic monitored evolution: unitary steps in the circulant
//! eigenbasis interleaved with no-click projections at the detector site.
//!
//! The walker state is kept unnormalized after each projection, so its
//! squared norm is the survival probability directly. Everything here is
//! deterministic; no measurement outcomes are sampled.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{mode_energy, LatticeConfig};

/// Survival level that defines the relaxation time: halfway between the
/// initial value 1 and the generic asymptote 1/2.
pub const RELAXATION_LEVEL: f64 = 0.75;

/// First-detection values in `(-NEG_FLOOR, 0)` are rounding noise and are
/// clamped to zero.
pub const NEG_FLOOR: f64 = 1e-12;

/// Detection protocol: stroboscopic projections every `tau` at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub tau: f64,
    pub detector: usize,
    pub initial: usize,
    pub n_steps: usize,
}

impl ProtocolConfig {
    pub fn new(tau: f64, detector: usize, initial: usize, n_steps: usize) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::Config(format!("detection period must be positive, got {tau}")));
        }
        if detector == initial {
            // the return problem (detector on the initial site) is out of scope
            return Err(Error::Config(
                "detector site must differ from the initial site".into(),
            ));
        }
        if n_steps == 0 {
            return Err(Error::Config("need at least one detection attempt".into()));
        }
        Ok(Self { tau, detector, initial, n_steps })
    }

    fn validate_against(&self, lat: &LatticeConfig) -> Result<()> {
        lat.check_site(self.detector)?;
        lat.check_site(self.initial)?;
        Ok(())
    }
}

/// Complex amplitude vector over the lattice sites. Deliberately left
/// unnormalized after projections.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    amplitudes: Vec<Complex64>,
}

impl WalkerState {
    pub fn from_site(n: usize, site: usize) -> Result<Self> {
        if site >= n {
            return Err(Error::SiteOutOfRange { index: site, n });
        }
        let mut amplitudes = vec![Complex64::ZERO; n];
        amplitudes[site] = Complex64::ONE;
        Ok(Self { amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// One stroboscopic unitary step `U(tau)` applied in the circulant
/// eigenbasis: FFT, phase multiply, inverse FFT. Cost `O(n log n)`.
pub struct Propagator {
    n: usize,
    /// `exp(-i E_a tau) / n`; the `1/n` absorbs the FFT round-trip scale.
    phases: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(lat: &LatticeConfig, tau: f64) -> Self {
        let n = lat.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scale = 1.0 / n as f64;
        let phases = (0..n)
            .map(|a| Complex64::from_polar(scale, -mode_energy(lat, a) * tau))
            .collect();
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { n, phases, fwd, inv, scratch: vec![Complex64::ZERO; scratch_len] }
    }

    pub fn step(&mut self, amplitudes: &mut [Complex64]) -> Result<()> {
        if amplitudes.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: amplitudes.len() });
        }
        self.fwd.process_with_scratch(amplitudes, &mut self.scratch);
        for (a, phase) in amplitudes.iter_mut().zip(&self.phases) {
            *a *= phase;
        }
        self.inv.process_with_scratch(amplitudes, &mut self.scratch);
        Ok(())
    }
}

/// Apply `U(tau)` once. For repeated stepping build a [`Propagator`].
pub fn evolve_unitary(state: &WalkerState, lat: &LatticeConfig, tau: f64) -> Result<WalkerState> {
    let mut out = state.clone();
    Propagator::new(lat, tau).step(&mut out.amplitudes)?;
    Ok(out)
}

/// No-click projection: zero the detector amplitude, return the click
/// probability `|psi_D|^2` that was removed.
pub fn project_no_click(state: &mut WalkerState, detector: usize) -> Result<f64> {
    if detector >= state.len() {
        return Err(Error::SiteOutOfRange { index: detector, n: state.len() });
    }
    let p_click = state.amplitudes[detector].norm_sqr();
    state.amplitudes[detector] = Complex64::ZERO;
    Ok(p_click)
}

/// Survival record of one monitored run: `survival[n]` is the probability
/// that the detector has not clicked up to step `n`, with `survival[0] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTrace {
    tau: f64,
    survival: Vec<f64>,
}

impl SurvivalTrace {
    /// Wrap a raw survival series (index 0 is the pre-measurement value).
    pub fn from_survival(tau: f64, survival: Vec<f64>) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::Config(format!("detection period must be positive, got {tau}")));
        }
        if survival.is_empty() {
            return Err(Error::Config("empty survival series".into()));
        }
        Ok(Self { tau, survival })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of detection attempts (excludes the `t = 0` entry).
    pub fn steps(&self) -> usize {
        self.survival.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn survival(&self, n: usize) -> f64 {
        self.survival[n]
    }

    pub fn survival_series(&self) -> &[f64] {
        &self.survival
    }

    pub fn pdet(&self, n: usize) -> f64 {
        1.0 - self.survival[n]
    }

    /// First-detection probability at step `n >= 1`, with the rounding
    /// floor applied.
    pub fn first_detection(&self, n: usize) -> f64 {
        let f = self.survival[n - 1] - self.survival[n];
        if f < 0.0 && f > -NEG_FLOOR {
            0.0
        } else {
            f
        }
    }

    /// Mean of the survival values recorded in `t_lo <= t <= t_hi`.
    pub fn mean_over(&self, t_lo: f64, t_hi: f64) -> f64 {
        let lo = (t_lo / self.tau).ceil().max(0.0) as usize;
        let hi = ((t_hi / self.tau).floor() as usize).min(self.steps());
        assert!(lo <= hi, "empty window [{t_lo}, {t_hi}]");
        let sum: f64 = self.survival[lo..=hi].iter().sum();
        sum / (hi - lo + 1) as f64
    }
}

/// Fidelity record `f(t_n) = |<initial|psi_n^+>|^2`, with `f(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    tau: f64,
    values: Vec<f64>,
}

impl FidelityTrace {
    pub fn from_values(tau: f64, values: Vec<f64>) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::Config(format!("detection period must be positive, got {tau}")));
        }
        if values.is_empty() {
            return Err(Error::Config("empty fidelity series".into()));
        }
        Ok(Self { tau, values })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Survival and fidelity of a single monitored run.
#[derive(Debug, Clone)]
pub struct MonitoredRun {
    pub trace: SurvivalTrace,
    pub fidelity: FidelityTrace,
}

/// Run the monitored walk, recording survival and fidelity at every step.
pub fn run_full(lat: &LatticeConfig, prot: &ProtocolConfig) -> Result<MonitoredRun> {
    prot.validate_against(lat)?;
    let mut state = WalkerState::from_site(lat.n(), prot.initial)?;
    let mut propagator = Propagator::new(lat, prot.tau);

    let mut survival = Vec::with_capacity(prot.n_steps + 1);
    let mut fidelity = Vec::with_capacity(prot.n_steps + 1);
    survival.push(1.0);
    fidelity.push(1.0);
    for _ in 1..=prot.n_steps {
        propagator.step(&mut state.amplitudes)?;
        project_no_click(&mut state, prot.detector)?;
        survival.push(state.norm_sq());
        fidelity.push(state.amplitudes[prot.initial].norm_sqr());
    }
    Ok(MonitoredRun {
        trace: SurvivalTrace::from_survival(prot.tau, survival)?,
        fidelity: FidelityTrace::from_values(prot.tau, fidelity)?,
    })
}

/// Survival trace of the monitored walk.
pub fn run_monitored(lat: &LatticeConfig, prot: &ProtocolConfig) -> Result<SurvivalTrace> {
    Ok(run_full(lat, prot)?.trace)
}

/// Fidelity series of the monitored walk.
pub fn fidelity_trace(lat: &LatticeConfig, prot: &ProtocolConfig) -> Result<FidelityTrace> {
    Ok(run_full(lat, prot)?.fidelity)
}

/// Smallest recorded time beyond which the fidelity stays below `threshold`.
///
/// Errors when the series still exceeds the threshold at its end.
pub fn equilibration_time(fid: &FidelityTrace, threshold: f64) -> Result<f64> {
    let values = fid.values();
    let last_above = values.iter().rposition(|&f| f >= threshold);
    match last_above {
        None => Ok(0.0),
        Some(i) if i + 1 < values.len() => Ok(fid.time(i + 1)),
        Some(_) => Err(Error::NotEquilibrated { threshold }),
    }
}

/// First recorded time at which the survival reaches [`RELAXATION_LEVEL`].
pub fn relaxation_time(trace: &SurvivalTrace) -> Result<f64> {
    trace
        .survival_series()
        .iter()
        .position(|&s| s <= RELAXATION_LEVEL)
        .map(|n| trace.time(n))
        .ok_or(Error::NotRelaxed { level: RELAXATION_LEVEL })
}
