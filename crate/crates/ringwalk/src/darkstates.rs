//! Analytic dark states of the monitored walk, the asymptotic survival
//! value they carry, and the all-to-all bright-state special case.
//!
//! A dark state is an eigenvector of the full Hamiltonian with an exact node
//! at the detector site; the monitored map only imprints a phase on it. For
//! every degenerate standing-wave pair one combination has such a node, which
//! pins the asymptotic survival probability independently of the hopping
//! exponent.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;

/// Orthonormal dark vectors, each with an exact node at the detector.
#[derive(Debug, Clone)]
pub struct DarkBasis {
    n: usize,
    detector: usize,
    /// Pair index `a` for each vector (the `sin(2 pi a (j - D) / n)` mode).
    indices: Vec<usize>,
    vectors: Vec<Vec<f64>>,
}

impl DarkBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn detector(&self) -> usize {
        self.detector
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn pair_indices(&self) -> &[usize] {
        &self.indices
    }

    /// Squared overlap of the site state `|l>` with the dark subspace.
    pub fn overlap_from_site(&self, l: usize) -> f64 {
        self.vectors.iter().map(|v| v[l] * v[l]).sum()
    }
}

/// Unit-norm dark states for every degenerate pair `a = 1..n/2 - 1`.
///
/// The alternating `a = n/2` vector is appended only if it has a detector
/// node, which is decided numerically; its amplitude there is `1/sqrt(n)`
/// for every detector site, so in practice the count is `n/2 - 1`.
///
/// All-to-all hopping (`alpha = 0`) is rejected: its degeneracy structure is
/// different and is handled by [`bright_state`].
pub fn dark_basis(lat: &LatticeConfig, detector: usize) -> Result<DarkBasis> {
    if lat.hopping().is_all_to_all() {
        return Err(Error::Config(
            "all-to-all hopping has no standing-wave dark pairs; see bright_state".into(),
        ));
    }
    lat.check_site(detector)?;
    let n = lat.n();
    let norm = (2.0 / n as f64).sqrt();
    let mut indices = Vec::with_capacity(n / 2);
    let mut vectors = Vec::with_capacity(n / 2);
    for a in 1..n / 2 {
        let v: Vec<f64> = (0..n)
            .map(|j| {
                let arg = 2.0 * PI * (a as f64) * (j as f64 - detector as f64) / n as f64;
                norm * arg.sin()
            })
            .collect();
        indices.push(a);
        vectors.push(v);
    }
    // alternating mode: components (-1)^j / sqrt(n); dark only with a node
    // at the detector
    let alt: Vec<f64> = (0..n)
        .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).sqrt())
        .collect();
    if alt[detector].abs() < 1e-14 {
        indices.push(n / 2);
        vectors.push(alt);
    }
    Ok(DarkBasis { n, detector, indices, vectors })
}

/// Asymptotic survival probability for a walker starting at `initial` with a
/// detector at `detector`: the squared overlap of the initial site with the
/// dark subspace.
///
/// Closed form `(2/n) sum_{a=1}^{n/2} sin^2(2 pi a (D - l) / n)`, which is
/// exactly `1/2` for a generic offset and `0` when the offset is `n/2`.
pub fn survival_infinity(n: usize, detector: usize, initial: usize) -> Result<f64> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Config(format!("site count must be even and >= 4, got {n}")));
    }
    if detector >= n {
        return Err(Error::SiteOutOfRange { index: detector, n });
    }
    if initial >= n {
        return Err(Error::SiteOutOfRange { index: initial, n });
    }
    if detector == initial {
        return Err(Error::Config("detector site must differ from the initial site".into()));
    }
    let offset = detector.abs_diff(initial);
    let sum: f64 = (1..=n / 2)
        .map(|a| {
            let arg = 2.0 * PI * (a as f64) * (offset as f64) / n as f64;
            arg.sin().powi(2)
        })
        .sum();
    Ok(2.0 * sum / n as f64)
}

/// Bright state of the all-to-all lattice and the asymptotic detection
/// probability it carries.
#[derive(Debug, Clone)]
pub struct BrightState {
    /// Unit-norm vector with its antinode at the detector.
    pub vector: Vec<f64>,
    /// Asymptotic total detection probability; tends to zero with `1/n`.
    pub pdet_infinity: f64,
}

/// All-to-all (`alpha = 0`) special case: the excited manifold is massively
/// degenerate and a single combination couples to the detector, so almost
/// nothing is ever detected. Survival tends to one as the lattice grows.
pub fn bright_state(n: usize, detector: usize, initial: usize) -> Result<BrightState> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Config(format!("site count must be even and >= 4, got {n}")));
    }
    if detector >= n {
        return Err(Error::SiteOutOfRange { index: detector, n });
    }
    if initial >= n {
        return Err(Error::SiteOutOfRange { index: initial, n });
    }
    if detector == initial {
        return Err(Error::Config("detector site must differ from the initial site".into()));
    }
    // detector-antinode partner of the dark combinations, summed over all
    // pairs: proportional to the excited-manifold projection of |D>
    let nf = n as f64;
    let raw: Vec<f64> = (0..n)
        .map(|j| if j == detector { nf - 1.0 } else { -1.0 })
        .collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let vector = raw.into_iter().map(|x| x / norm).collect();

    let offset = detector.abs_diff(initial) as f64;
    let cos_sum: f64 = (1..n)
        .map(|a| (2.0 * PI * (a as f64) * offset / nf).cos())
        .sum();
    let pdet_infinity = 2.0 / nf * cos_sum * cos_sum;
    Ok(BrightState { vector, pdet_infinity })
}
