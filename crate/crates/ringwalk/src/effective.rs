//! Non-Hermitian reduction of the monitored walk: the effective Hamiltonian
//! for small `J tau`, its exact complex-symmetric spectrum, first-order
//! decay rates, long-wavelength closed forms, and spectral reconstructions
//! of the survival and fidelity series.
//!
//! Numerically, the dense solves run on the `(n-1)`-dimensional complement
//! block (detector row and column deleted). The detector direction itself is
//! an exact eigenvector of the full matrix with eigenvalue zero and no
//! overlap with any initial site away from the detector; it is appended to
//! the mode list analytically rather than fed through the eigensolver.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{hamiltonian_dense, mode_energy_approx, zeta_partial, LatticeConfig};

/// Modes with `gamma < DARK_THRESHOLD_FACTOR * gamma_max` count as dark.
pub const DARK_THRESHOLD_FACTOR: f64 = 1e-12;

/// One mode of the effective spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMode {
    /// Real part of the eigenvalue (energy, units `J`).
    pub lambda0: f64,
    /// Decay rate `-Im(lambda) / tau`, clamped to be non-negative (units `J`).
    pub gamma: f64,
    /// Real spectral weight of the initial site on this mode.
    pub weight: f64,
    /// Biorthogonal amplitude `<l|mode><mode~|l>`; feeds the fidelity.
    pub amplitude: Complex64,
}

/// Decay rates and initial-site weights of the effective Hamiltonian,
/// sorted by decreasing rate (ties by increasing energy).
#[derive(Debug, Clone)]
pub struct EffectiveSpectrum {
    n: usize,
    tau: f64,
    modes: Vec<EffectiveMode>,
}

impl EffectiveSpectrum {
    fn new(n: usize, tau: f64, mut modes: Vec<EffectiveMode>) -> Self {
        modes.sort_by(|a, b| {
            b.gamma
                .partial_cmp(&a.gamma)
                .unwrap()
                .then(a.lambda0.partial_cmp(&b.lambda0).unwrap())
        });
        Self { n, tau, modes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn modes(&self) -> &[EffectiveMode] {
        &self.modes
    }

    pub fn gamma_max(&self) -> f64 {
        self.modes[0].gamma
    }

    pub fn gamma_second(&self) -> f64 {
        self.modes[1].gamma
    }

    /// Dark classification threshold `1e-12 * gamma_max`.
    pub fn epsilon_dark(&self) -> f64 {
        DARK_THRESHOLD_FACTOR * self.gamma_max()
    }

    /// Number of modes below the dark threshold (detector mode included).
    pub fn dark_count(&self) -> usize {
        let eps = self.epsilon_dark();
        self.modes.iter().filter(|m| m.gamma < eps).count()
    }

    /// Summed initial-site weight on the dark modes.
    pub fn dark_weight(&self) -> f64 {
        let eps = self.epsilon_dark();
        self.modes.iter().filter(|m| m.gamma < eps).map(|m| m.weight).sum()
    }
}

/// Effective non-Hermitian Hamiltonian on the full lattice: the projected
/// Hamiltonian plus the anti-Hermitian detector term, `n x n` with the
/// detector row and column identically zero. Complex symmetric.
pub fn build_h_eff(lat: &LatticeConfig, detector: usize, tau: f64) -> Result<Array2<Complex64>> {
    lat.check_site(detector)?;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::Config(format!("detection period must be positive, got {tau}")));
    }
    if lat.j() * tau > 0.5 {
        log::warn!(
            "J*tau = {} is outside the weak-monitoring regime; the effective picture degrades",
            lat.j() * tau
        );
    }
    let n = lat.n();
    let h = hamiltonian_dense(lat);
    let mut out = Array2::zeros((n, n));
    let half_tau = 0.5 * tau;
    for i in 0..n {
        if i == detector {
            continue;
        }
        let wi = h[[i, detector]];
        for j in 0..n {
            if j == detector {
                continue;
            }
            let wj = h[[j, detector]];
            out[[i, j]] = Complex64::new(h[[i, j]], -half_tau * wi * wj);
        }
    }
    Ok(out)
}

/// Complement-block view of `h_eff` with the detector row/column removed,
/// after checking that they are identically zero.
fn complement_block(h_eff: &Array2<Complex64>, detector: usize) -> Result<Array2<Complex64>> {
    let n = h_eff.nrows();
    if h_eff.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h_eff.ncols() });
    }
    if detector >= n {
        return Err(Error::SiteOutOfRange { index: detector, n });
    }
    for i in 0..n {
        if h_eff[[i, detector]] != Complex64::ZERO || h_eff[[detector, i]] != Complex64::ZERO {
            return Err(Error::Config(
                "detector row/column of the effective Hamiltonian must be zero".into(),
            ));
        }
    }
    let m = n - 1;
    let mut hc = Array2::zeros((m, m));
    for i in 0..m {
        let ii = if i < detector { i } else { i + 1 };
        for j in 0..m {
            let jj = if j < detector { j } else { j + 1 };
            hc[[i, j]] = h_eff[[ii, jj]];
        }
    }
    Ok(hc)
}

fn complement_index(site: usize, detector: usize) -> usize {
    if site < detector {
        site
    } else {
        site - 1
    }
}

/// The analytically known detector mode of the full matrix.
fn detector_mode() -> EffectiveMode {
    EffectiveMode { lambda0: 0.0, gamma: 0.0, weight: 0.0, amplitude: Complex64::ZERO }
}

/// Exact spectrum of the effective Hamiltonian.
///
/// Dense complex eigendecomposition of the complement block; for a complex
/// symmetric matrix the left eigenvectors are the transposes of the right
/// ones, so the biorthogonal weights come from transpose-normalized columns.
/// Every eigenvalue is refined with one Rayleigh-quotient evaluation, which
/// keeps the imaginary parts of the dark modes at true numerical zero
/// instead of eigensolver backward-error level.
pub fn exact_spectrum(
    h_eff: &Array2<Complex64>,
    tau: f64,
    detector: usize,
    initial: usize,
) -> Result<EffectiveSpectrum> {
    let n = h_eff.nrows();
    if initial >= n {
        return Err(Error::SiteOutOfRange { index: initial, n });
    }
    if initial == detector {
        return Err(Error::Config("detector site must differ from the initial site".into()));
    }
    let hc = complement_block(h_eff, detector)?;
    let m = n - 1;
    let (_, vecs) = hc.eig().map_err(|e| {
        let scale = hc.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Error::Eigensolver(format!("zgeev on {m}x{m} block (max entry {scale:.3e}): {e}"))
    })?;
    let hv = hc.dot(&vecs);
    let ic = complement_index(initial, detector);

    let mut modes = Vec::with_capacity(n);
    for a in 0..m {
        let col = vecs.column(a);
        let mut sq = Complex64::ZERO; // v^T v
        let mut rq = Complex64::ZERO; // v^T H v
        for i in 0..m {
            sq += col[i] * col[i];
            rq += col[i] * hv[[i, a]];
        }
        if sq.norm() < 1e-10 {
            return Err(Error::Eigensolver(format!(
                "quasi-defective eigenvector (v^T v = {:.3e}) in mode {a}",
                sq.norm()
            )));
        }
        let lambda = rq / sq;
        let amplitude = col[ic] * col[ic] / sq;
        modes.push(EffectiveMode {
            lambda0: lambda.re,
            gamma: (-lambda.im / tau).max(0.0),
            weight: amplitude.re,
            amplitude,
        });
    }
    modes.push(detector_mode());
    Ok(EffectiveSpectrum::new(n, tau, modes))
}

/// Convenience wrapper that builds the effective Hamiltonian first.
pub fn exact_spectrum_for(
    lat: &LatticeConfig,
    detector: usize,
    tau: f64,
    initial: usize,
) -> Result<EffectiveSpectrum> {
    let h_eff = build_h_eff(lat, detector, tau)?;
    exact_spectrum(&h_eff, tau, detector, initial)
}

/// Decay rates only, via an eigenvalue-only solve. Fast path for gap scans
/// where neither weights nor dark/gray separation at machine precision is
/// needed. Sorted descending; the detector mode's zero rate is included.
pub fn exact_decay_rates(lat: &LatticeConfig, detector: usize, tau: f64) -> Result<Vec<f64>> {
    let h_eff = build_h_eff(lat, detector, tau)?;
    let hc = complement_block(&h_eff, detector)?;
    let lams = hc
        .eigvals()
        .map_err(|e| Error::Eigensolver(format!("zgeev (values only): {e}")))?;
    let mut rates: Vec<f64> = lams.iter().map(|lam| (-lam.im / tau).max(0.0)).collect();
    rates.push(0.0);
    rates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(rates)
}

/// First-order decay rates: half the squared coupling of each unperturbed
/// eigenvector to the detector column of the Hamiltonian.
///
/// Within clusters of (near-)degenerate eigenvalues the coupling is rank
/// one, so the cluster basis is rotated to put the entire coupling on one
/// member; the remaining members are exactly dark at this order. Without the
/// rotation an eigensolver's arbitrary basis choice inside a degenerate
/// subspace would smear the rate over the cluster.
pub fn gamma_perturbative(
    lat: &LatticeConfig,
    detector: usize,
    tau: f64,
    initial: usize,
) -> Result<EffectiveSpectrum> {
    lat.check_site(detector)?;
    lat.check_site(initial)?;
    if initial == detector {
        return Err(Error::Config("detector site must differ from the initial site".into()));
    }
    let n = lat.n();
    let m = n - 1;
    let h = hamiltonian_dense(lat);
    let mut hc = Array2::zeros((m, m));
    let mut w = Array1::zeros(m);
    for i in 0..m {
        let ii = if i < detector { i } else { i + 1 };
        w[i] = h[[ii, detector]];
        for j in 0..m {
            let jj = if j < detector { j } else { j + 1 };
            hc[[i, j]] = h[[ii, jj]];
        }
    }
    let (lam0, vecs) = hc
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigensolver(format!("dsyev on {m}x{m} block: {e}")))?;
    let ic = complement_index(initial, detector);
    let scale = lam0.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let cluster_tol = 1e-9 * scale;

    let mut modes = Vec::with_capacity(n);
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && lam0[end] - lam0[end - 1] <= cluster_tol {
            end += 1;
        }
        let size = end - start;
        // coupling of each cluster member to the detector column
        let coupling: Vec<f64> = (start..end)
            .map(|a| (0..m).map(|i| vecs[[i, a]] * w[i]).sum())
            .collect();
        let nc_sq: f64 = coupling.iter().map(|c| c * c).sum();
        if size == 1 {
            let v_l = vecs[[ic, start]];
            modes.push(EffectiveMode {
                lambda0: lam0[start],
                gamma: 0.5 * nc_sq,
                weight: v_l * v_l,
                amplitude: Complex64::new(v_l * v_l, 0.0),
            });
        } else {
            // Householder basis of the cluster with the last vector along
            // the coupling direction
            let unit: Vec<f64> = if nc_sq > f64::MIN_POSITIVE {
                coupling.iter().map(|c| c / nc_sq.sqrt()).collect()
            } else {
                let mut e = vec![0.0; size];
                e[size - 1] = 1.0;
                e
            };
            let mut p: Vec<f64> = unit.iter().map(|&u| -u).collect();
            p[size - 1] += 1.0; // p = e_last - unit
            let p_sq: f64 = p.iter().map(|x| x * x).sum();
            for k in 0..size {
                // k-th rotated basis vector in cluster coordinates
                let qk: Vec<f64> = (0..size)
                    .map(|l| {
                        let elk = if l == k { 1.0 } else { 0.0 };
                        if p_sq > f64::MIN_POSITIVE {
                            elk - 2.0 * p[l] * p[k] / p_sq
                        } else {
                            elk
                        }
                    })
                    .collect();
                let v_l: f64 =
                    (0..size).map(|l| qk[l] * vecs[[ic, start + l]]).sum();
                let gamma = if k == size - 1 { 0.5 * nc_sq } else { 0.0 };
                modes.push(EffectiveMode {
                    lambda0: lam0[start + k],
                    gamma,
                    weight: v_l * v_l,
                    amplitude: Complex64::new(v_l * v_l, 0.0),
                });
            }
        }
        start = end;
    }
    modes.push(detector_mode());
    Ok(EffectiveSpectrum::new(n, tau, modes))
}

/// Standing-wave estimate of the decay rate at mode index `a`:
/// `J_k^2 cos^2(k D) / n` with `k = 2 pi a / n`. Quantitative for
/// exponents below one; logs a warning outside that regime.
pub fn gamma_k_approx(lat: &LatticeConfig, detector: usize, a: usize) -> Result<f64> {
    lat.check_site(detector)?;
    if let crate::lattice::Hopping::PowerLaw(alpha) = lat.hopping() {
        if alpha >= 1.0 {
            log::warn!("standing-wave rate estimate degrades for exponent {alpha} >= 1");
        }
    }
    let n = lat.n();
    let k = 2.0 * PI * a as f64 / n as f64;
    let jk = mode_energy_approx(lat, a);
    Ok(jk * jk * (k * detector as f64).cos().powi(2) / n as f64)
}

/// Closed-form estimate of the largest decay rate: `2 J^2 zeta_n(alpha)^2 / n`.
pub fn gamma_max_closed(lat: &LatticeConfig) -> f64 {
    let zeta = match lat.hopping() {
        crate::lattice::Hopping::PowerLaw(alpha) => zeta_partial(alpha, lat.n()),
        crate::lattice::Hopping::NearestNeighbor => 1.0,
    };
    2.0 * lat.j() * lat.j() * zeta * zeta / lat.n() as f64
}

/// Difference of the two largest decay rates.
pub fn spectral_gap(spec: &EffectiveSpectrum) -> f64 {
    spec.gamma_max() - spec.gamma_second()
}

/// Spectral reconstruction of the survival probability,
/// `sum_a w_a exp(-2 (gamma_a tau) t)`.
pub fn survival_from_spectrum(spec: &EffectiveSpectrum, t: f64) -> f64 {
    spec.modes
        .iter()
        .map(|m| m.weight * (-2.0 * m.gamma * spec.tau * t).exp())
        .sum()
}

/// Spectral reconstruction of the fidelity: damped interference of all
/// modes, `|sum_a amp_a exp(-(i lambda0_a + tau gamma_a) t)|^2`.
pub fn fidelity_from_spectrum(spec: &EffectiveSpectrum, t: f64) -> f64 {
    let sum: Complex64 = spec
        .modes
        .iter()
        .map(|m| {
            m.amplitude
                * (-spec.tau * m.gamma * t).exp()
                * Complex64::from_polar(1.0, -m.lambda0 * t)
        })
        .sum();
    sum.norm_sqr()
}

/// Two-term survival estimate for the gapped regime (exponents below 1/2):
/// an isolated fast mode of weight `2/n` plus the continuum of standing
/// waves, integrated by trapezoid over the mode grid.
///
/// Not normalized at `t = 0` (the continuum term alone contributes 2); use
/// it for time profiles, not absolute values.
pub fn gapped_two_term_survival(lat: &LatticeConfig, detector: usize, tau: f64, t: f64) -> Result<f64> {
    lat.check_site(detector)?;
    let n = lat.n();
    let fast = 2.0 / n as f64 * (-2.0 * tau * gamma_max_closed(lat) * t).exp();
    // trapezoid over k = 2 pi a / n, a = 1..n/2; the k = 0 mode is the
    // isolated term above
    let dk = 2.0 * PI / n as f64;
    let mut integral = 0.0;
    let mut prev: Option<f64> = None;
    for a in 1..=n / 2 {
        let f = (-2.0 * tau * gamma_k_approx(lat, detector, a)? * t).exp();
        if let Some(p) = prev {
            integral += 0.5 * (p + f) * dk;
        }
        prev = Some(f);
    }
    Ok(fast + 2.0 * integral / PI)
}

/// Histogram bin over inverse decay rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBin {
    pub inv_gamma_lo: f64,
    pub inv_gamma_hi: f64,
    /// Mode count in the bin divided by the lattice size.
    pub mass: f64,
}

/// Density of modes over inverse decay rates.
#[derive(Debug, Clone)]
pub struct ModeDensity {
    /// Mass of the dark modes (infinite inverse rate), `dark_count / n`.
    pub dark_mass: f64,
    pub bins: Vec<DensityBin>,
}

impl ModeDensity {
    pub fn total_mass(&self) -> f64 {
        self.dark_mass + self.bins.iter().map(|b| b.mass).sum::<f64>()
    }
}

/// Bin the non-dark modes by inverse decay rate with bin width `delta`;
/// dark modes are reported as a separate point mass.
pub fn mode_density(spec: &EffectiveSpectrum, delta: f64) -> Result<ModeDensity> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Config(format!("bin width must be positive, got {delta}")));
    }
    let eps = spec.epsilon_dark();
    let nf = spec.n() as f64;
    let mut counts: std::collections::BTreeMap<u64, usize> = std::collections::BTreeMap::new();
    let mut dark = 0usize;
    for m in spec.modes() {
        if m.gamma < eps {
            dark += 1;
        } else {
            let bin = (1.0 / m.gamma / delta).floor() as u64;
            *counts.entry(bin).or_default() += 1;
        }
    }
    let bins = counts
        .into_iter()
        .map(|(bin, count)| DensityBin {
            inv_gamma_lo: bin as f64 * delta,
            inv_gamma_hi: (bin + 1) as f64 * delta,
            mass: count as f64 / nf,
        })
        .collect();
    Ok(ModeDensity { dark_mass: dark as f64 / nf, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::Inv;

    fn lat(n: usize, alpha: f64) -> LatticeConfig {
        LatticeConfig::power_law(n, alpha, 1.0).unwrap()
    }

    #[test]
    fn h_eff_is_symmetric_with_zero_detector_row() {
        let l = lat(16, 1.0);
        let h = build_h_eff(&l, 5, 0.1).unwrap();
        for i in 0..16 {
            assert_eq!(h[[i, 5]], Complex64::ZERO);
            assert_eq!(h[[5, i]], Complex64::ZERO);
            for j in 0..16 {
                assert_eq!(h[[i, j]], h[[j, i]]);
            }
        }
    }

    /// Stroboscopic-map oracle: the exact one-step no-click map restricted
    /// to the complement must agree with `exp(-i H_eff tau)` up to the
    /// third order in `tau`. Halving `tau` must shrink the defect by about
    /// eight; a wrong detector-term coefficient would leave a quadratic
    /// residual instead.
    #[test]
    fn h_eff_matches_stroboscopic_map_to_second_order() {
        let l = lat(16, 1.0);
        let d = 5;
        let err_at = |tau: f64| -> f64 {
            // exact map P U(tau) P on the complement, from the Hermitian
            // eigendecomposition of H
            let h = hamiltonian_dense(&l);
            let (e, v) = h.eigh(UPLO::Lower).unwrap();
            let mut u = Array2::<Complex64>::zeros((16, 16));
            for i in 0..16 {
                for j in 0..16 {
                    let mut s = Complex64::ZERO;
                    for a in 0..16 {
                        s += Complex64::from_polar(v[[i, a]] * v[[j, a]], -e[a] * tau);
                    }
                    u[[i, j]] = s;
                }
            }
            let mut map = Array2::<Complex64>::zeros((15, 15));
            for i in 0..15 {
                let ii = if i < d { i } else { i + 1 };
                for j in 0..15 {
                    let jj = if j < d { j } else { j + 1 };
                    map[[i, j]] = u[[ii, jj]];
                }
            }
            // exp(-i H_eff tau) via the complex eigendecomposition
            let heff = build_h_eff(&l, d, tau).unwrap();
            let hc = complement_block(&heff, d).unwrap();
            let (lam, vc) = hc.eig().unwrap();
            let vinv = vc.inv().unwrap();
            let mut diag = Array2::<Complex64>::zeros((15, 15));
            for a in 0..15 {
                diag[[a, a]] = (-Complex64::i() * lam[a] * tau).exp();
            }
            let expm = vc.dot(&diag).dot(&vinv);
            map.iter()
                .zip(expm.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        let e1 = err_at(0.1);
        let e2 = err_at(0.05);
        assert!(e1 < 1e-4, "tau=0.1 defect {e1:.3e}");
        assert!(e1 / e2 > 6.0, "defect should shrink cubically: {e1:.3e} -> {e2:.3e}");
    }

    #[test]
    fn exact_spectrum_hermitian_limit() {
        // tau -> 0: rates vanish, energies match the complement spectrum
        let l = lat(16, 1.0);
        let spec = exact_spectrum_for(&l, 5, 1e-9, 0).unwrap();
        for m in spec.modes() {
            assert!(m.gamma * spec.tau() < 1e-12);
        }
        let h = hamiltonian_dense(&l);
        let mut hc = Array2::zeros((15, 15));
        for i in 0..15 {
            let ii = if i < 5 { i } else { i + 1 };
            for j in 0..15 {
                let jj = if j < 5 { j } else { j + 1 };
                hc[[i, j]] = h[[ii, jj]];
            }
        }
        let (e0, _) = hc.eigh(UPLO::Lower).unwrap();
        // the spectrum is the complement spectrum plus the detector zero
        let mut want: Vec<f64> = e0.to_vec();
        want.push(0.0);
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut got: Vec<f64> = spec.modes().iter().map(|m| m.lambda0).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (w, g) in want.iter().zip(&got) {
            assert_abs_diff_eq!(w, g, epsilon = 1e-8);
        }
    }

    #[test]
    fn exact_spectrum_weights_sum_to_one() {
        for alpha in [0.3, 1.5] {
            let spec = exact_spectrum_for(&lat(64, alpha), 9, 0.2, 0).unwrap();
            let total: f64 = spec.modes().iter().map(|m| m.weight).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
            for m in spec.modes() {
                assert!(m.gamma >= 0.0);
            }
        }
    }

    #[test]
    fn exact_dark_count_is_half() {
        for alpha in [0.5, 1.5, 3.0] {
            let spec = exact_spectrum_for(&lat(64, alpha), 9, 0.2, 0).unwrap();
            assert_eq!(spec.dark_count(), 32, "alpha={alpha}");
        }
    }

    /// The rate distribution span widens by orders of magnitude as the
    /// exponent drops below one.
    #[test]
    fn rate_span_grows_for_small_exponents() {
        let span = |alpha: f64| {
            let spec = exact_spectrum_for(&lat(128, alpha), 9, 0.2, 0).unwrap();
            spec.gamma_max()
        };
        assert!(span(0.2) / span(1.5) > 1e2);
    }

    #[test]
    fn perturbative_dark_partner_is_exact_zero() {
        // the sin-profile member of each degenerate pair decouples
        let spec = gamma_perturbative(&lat(64, 1.0), 9, 0.2, 0).unwrap();
        assert_eq!(spec.dark_count(), 32);
        let eps = spec.epsilon_dark();
        for m in spec.modes().iter().filter(|m| m.gamma < eps) {
            assert!(m.gamma < 1e-20, "dark rate should be structurally zero, got {}", m.gamma);
        }
    }

    #[test]
    fn perturbative_all_to_all_rank_one() {
        let n = 200;
        let spec = gamma_perturbative(&lat(n, 0.0), 9, 0.2, 0).unwrap();
        // one bright mode at J^2 (n-1) / 2, everything else decoupled
        let expect = 0.5 * (n as f64 - 1.0);
        assert_abs_diff_eq!(spec.gamma_max(), expect, epsilon = 1e-6 * expect);
        assert!(spec.gamma_second() < 1e-18);
    }

    #[test]
    fn perturbative_approaches_exact_with_small_tau() {
        let l = lat(64, 1.0);
        let pert = gamma_perturbative(&l, 9, 0.2, 0).unwrap();
        let dev_at = |tau: f64| {
            let exact = exact_spectrum_for(&l, 9, tau, 0).unwrap();
            let top_e: Vec<f64> = exact.modes().iter().map(|m| m.gamma).take(20).collect();
            let top_p: Vec<f64> = pert.modes().iter().map(|m| m.gamma).take(20).collect();
            top_e
                .iter()
                .zip(&top_p)
                .map(|(e, p)| (e - p).abs() / e)
                .fold(0.0f64, f64::max)
        };
        let d1 = dev_at(0.2);
        let d2 = dev_at(0.1);
        assert!(d1 < 0.05, "tau=0.2 deviation {d1:.3e}");
        assert!(d1 / d2 > 2.0, "first-order rates must converge: {d1:.3e} -> {d2:.3e}");
    }

    #[test]
    fn standing_wave_rate_examples() {
        let l = lat(1000, 0.5);
        // exact node of cos(k D) on the mode grid
        let g = gamma_k_approx(&l, 10, 25).unwrap();
        assert!(g < 1e-28);
        // k = 0 reproduces twice the closed-form maximum
        let g0 = gamma_k_approx(&l, 10, 0).unwrap();
        let zeta = zeta_partial(0.5, 1000);
        assert_abs_diff_eq!(g0, 4.0 * zeta * zeta / 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g0, 2.0 * gamma_max_closed(&l), epsilon = 1e-9);
    }

    #[test]
    fn closed_form_maximum_examples() {
        assert_abs_diff_eq!(gamma_max_closed(&lat(1000, 0.0)), 500.0, epsilon = 1e-9);
        // size scaling ~ n^(1 - 2 alpha)
        let alpha = 0.25;
        let ratio = gamma_max_closed(&lat(2000, alpha)) / gamma_max_closed(&lat(1000, alpha));
        assert!((ratio - 2f64.powf(1.0 - 2.0 * alpha)).abs() < 0.02);
        // size ordering flips across alpha = 1/2
        assert!(gamma_max_closed(&lat(1000, 0.4)) > gamma_max_closed(&lat(250, 0.4)));
        assert!(gamma_max_closed(&lat(1000, 0.7)) < gamma_max_closed(&lat(250, 0.7)));
    }

    #[test]
    fn survival_reconstruction_limits() {
        let spec = exact_spectrum_for(&lat(64, 1.5), 9, 0.2, 0).unwrap();
        assert_abs_diff_eq!(survival_from_spectrum(&spec, 0.0), 1.0, epsilon = 1e-9);
        // late times: only the dark weight survives, which is 1/2 exactly
        let late = survival_from_spectrum(&spec, 1e8);
        assert_abs_diff_eq!(late, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(spec.dark_weight(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn fidelity_reconstruction_starts_at_one() {
        let spec = exact_spectrum_for(&lat(64, 0.8), 9, 0.2, 0).unwrap();
        assert_abs_diff_eq!(fidelity_from_spectrum(&spec, 0.0), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn gap_from_sorted_rates() {
        let spec = exact_spectrum_for(&lat(64, 0.2), 9, 0.2, 0).unwrap();
        let gap = spectral_gap(&spec);
        assert!(gap > 0.0);
        assert_abs_diff_eq!(gap, spec.gamma_max() - spec.gamma_second(), epsilon = 1e-15);
    }

    #[test]
    fn gapped_estimate_shape() {
        let l = lat(1000, 0.2);
        let v0 = gapped_two_term_survival(&l, 10, 0.2, 0.0).unwrap();
        assert!((v0 - 2.0).abs() < 10.0 / 1000.0, "t=0 value {v0}");
        // fast 1/n drop at the closed-form maximum rate, then a plateau
        let t1 = 3.0 / (2.0 * 0.2 * gamma_max_closed(&l));
        let v1 = gapped_two_term_survival(&l, 10, 0.2, t1).unwrap();
        let drop = v0 - v1;
        assert!(drop > 0.5 * 2.0 / 1000.0 && drop < 3.0 * 2.0 / 1000.0, "drop {drop:.2e}");
        let v2 = gapped_two_term_survival(&l, 10, 0.2, 5.0 * t1).unwrap();
        assert!(v1 - v2 < drop / 3.0, "plateau violated: {v1} -> {v2}");
    }

    #[test]
    fn mode_density_accounts_for_every_mode() {
        let spec = exact_spectrum_for(&lat(64, 1.5), 9, 0.2, 0).unwrap();
        let density = mode_density(&spec, 10.0).unwrap();
        assert_abs_diff_eq!(density.dark_mass, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(density.total_mass(), 1.0, epsilon = 1e-12);
        assert!(mode_density(&spec, 0.0).is_err());
    }

    #[test]
    fn spectrum_ordering_is_deterministic() {
        let spec = exact_spectrum_for(&lat(32, 1.0), 5, 0.2, 0).unwrap();
        for pair in spec.modes().windows(2) {
            assert!(
                pair[0].gamma > pair[1].gamma
                    || (pair[0].gamma == pair[1].gamma && pair[0].lambda0 <= pair[1].lambda0)
            );
        }
    }
}
