//! Ring lattice with power-law hopping: Hamiltonian, circulant spectrum,
//! and information-propagation timescale annotations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Distance dependence of the tunneling amplitude.
///
/// The infinite-exponent limit gets its own variant instead of a huge float
/// exponent, so that `d^(-alpha)` never underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hopping {
    /// Amplitude `1/d^alpha` between sites at ring distance `d`.
    PowerLaw(f64),
    /// Only adjacent sites couple.
    NearestNeighbor,
}

impl Hopping {
    /// Dimensionless amplitude at ring distance `d >= 1`.
    pub fn amplitude(self, d: usize) -> f64 {
        match self {
            Hopping::PowerLaw(alpha) => (d as f64).powf(-alpha),
            Hopping::NearestNeighbor => {
                if d == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_all_to_all(self) -> bool {
        matches!(self, Hopping::PowerLaw(a) if a == 0.0)
    }
}

impl fmt::Display for Hopping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hopping::PowerLaw(alpha) => write!(f, "{alpha}"),
            Hopping::NearestNeighbor => write!(f, "nn"),
        }
    }
}

impl FromStr for Hopping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nn" | "inf" => Ok(Hopping::NearestNeighbor),
            other => {
                let alpha: f64 = other
                    .parse()
                    .map_err(|_| Error::Config(format!("unparseable hopping exponent {other:?}")))?;
                if !alpha.is_finite() || alpha < 0.0 {
                    return Err(Error::Config(format!(
                        "hopping exponent must be finite and >= 0, got {alpha}"
                    )));
                }
                Ok(Hopping::PowerLaw(alpha))
            }
        }
    }
}

/// Ring of `n` sites with hopping amplitude `-j / d^alpha`.
///
/// All times are reported in units of `1/j` and all rates in units of `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    n: usize,
    hopping: Hopping,
    j: f64,
}

impl LatticeConfig {
    /// `n` must be even and at least 4; `j` strictly positive.
    pub fn new(n: usize, hopping: Hopping, j: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!("site count must be even and >= 4, got {n}")));
        }
        if let Hopping::PowerLaw(alpha) = hopping {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(Error::Config(format!(
                    "hopping exponent must be finite and >= 0, got {alpha}"
                )));
            }
        }
        if !j.is_finite() || j <= 0.0 {
            return Err(Error::Config(format!("energy scale must be positive, got {j}")));
        }
        Ok(Self { n, hopping, j })
    }

    pub fn power_law(n: usize, alpha: f64, j: f64) -> Result<Self> {
        Self::new(n, Hopping::PowerLaw(alpha), j)
    }

    pub fn nearest_neighbor(n: usize, j: f64) -> Result<Self> {
        Self::new(n, Hopping::NearestNeighbor, j)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hopping(&self) -> Hopping {
        self.hopping
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn check_site(&self, index: usize) -> Result<usize> {
        if index < self.n {
            Ok(index)
        } else {
            Err(Error::SiteOutOfRange { index, n: self.n })
        }
    }
}

/// Minimum distance between two sites along the ring.
pub fn ring_distance(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= n {
        return Err(Error::SiteOutOfRange { index: i, n });
    }
    if j >= n {
        return Err(Error::SiteOutOfRange { index: j, n });
    }
    let d = i.abs_diff(j);
    Ok(d.min(n - d))
}

/// Dense Hamiltonian matrix: `H[i][j] = -j / d_ij^alpha`, zero diagonal.
pub fn hamiltonian_dense(cfg: &LatticeConfig) -> Array2<f64> {
    let n = cfg.n;
    let mut h = Array2::zeros((n, n));
    // coupling depends on |i-j| only; precompute one row of the circulant
    let row: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                let dist = d.min(n - d);
                -cfg.j * cfg.hopping.amplitude(dist)
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            h[[i, j]] = row[(n + i - j) % n];
        }
    }
    h
}

/// One circulant eigenvalue, indexed by `a` with wavenumber `k = 2*pi*a/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionMode {
    pub index: usize,
    pub wavenumber: f64,
    pub energy: f64,
}

/// Exact circulant spectrum of the lattice Hamiltonian, sorted by mode index.
#[derive(Debug, Clone)]
pub struct DispersionTable {
    modes: Vec<DispersionMode>,
}

impl DispersionTable {
    pub fn modes(&self) -> &[DispersionMode] {
        &self.modes
    }

    pub fn energy(&self, a: usize) -> f64 {
        self.modes[a].energy
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.energy)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Exact eigenvalue of the circulant row transform at mode index `a`.
///
/// This keeps the antipodal `d = n/2` coupling (counted once), so the table
/// matches the dense Hamiltonian to machine precision. Truncations that drop
/// the antipodal term are provided by [`mode_energy_approx`].
pub fn mode_energy(cfg: &LatticeConfig, a: usize) -> f64 {
    let n = cfg.n;
    let k = 2.0 * PI * a as f64 / n as f64;
    match cfg.hopping {
        Hopping::NearestNeighbor => -2.0 * cfg.j * k.cos(),
        Hopping::PowerLaw(_) => {
            let mut sum = 0.0;
            for d in 1..n / 2 {
                sum += 2.0 * (k * d as f64).cos() * cfg.hopping.amplitude(d);
            }
            // antipodal site: one coupling, phase (-1)^a
            let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * cfg.hopping.amplitude(n / 2);
            -cfg.j * sum
        }
    }
}

/// Long-wavelength form of the mode energy: the cosine sum runs over
/// `r = 1..=n/2`, i.e. the antipodal coupling enters with full weight and no
/// alternating phase. Feeds the closed-form decay-rate estimates.
pub fn mode_energy_approx(cfg: &LatticeConfig, a: usize) -> f64 {
    let n = cfg.n;
    let k = 2.0 * PI * a as f64 / n as f64;
    match cfg.hopping {
        Hopping::NearestNeighbor => -2.0 * cfg.j * k.cos(),
        Hopping::PowerLaw(_) => {
            let mut sum = 0.0;
            for r in 1..=n / 2 {
                sum += (k * r as f64).cos() * cfg.hopping.amplitude(r);
            }
            -2.0 * cfg.j * sum
        }
    }
}

/// Full dispersion table for all `n` modes.
pub fn dispersion(cfg: &LatticeConfig) -> DispersionTable {
    let n = cfg.n;
    let modes = (0..n)
        .map(|a| DispersionMode {
            index: a,
            wavenumber: 2.0 * PI * a as f64 / n as f64,
            energy: mode_energy(cfg, a),
        })
        .collect();
    DispersionTable { modes }
}

/// Partial zeta sum `zeta_n(alpha) = sum_{r=1}^{n/2} r^(-alpha)`.
pub fn zeta_partial(alpha: f64, n: usize) -> f64 {
    (1..=n / 2).map(|r| (r as f64).powf(-alpha)).sum()
}

/// Scaling regime of the minimal information-propagation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrRegime {
    /// `alpha > 2`: ballistic, linear in distance.
    Linear,
    /// `1 < alpha < 2`: sublinear in distance.
    Sublinear,
    /// `alpha = 1`: logarithmic in distance.
    Logarithmic,
    /// `1/2 < alpha < 1`: distance-independent.
    Constant,
    /// `0 <= alpha < 1/2`: depends only on system size.
    SizeDependent,
}

/// Representative propagation-time scale (up to an unknown constant),
/// used only to annotate output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrTimescale {
    pub regime: LrRegime,
    pub label: &'static str,
    pub value: f64,
}

/// Lower-bound timescale for reaching a site at distance `d` on a ring of
/// `n` sites, by hopping-exponent regime.
pub fn lr_timescale(hopping: Hopping, d: usize, n: usize) -> Result<LrTimescale> {
    if d < 1 || d > n / 2 {
        return Err(Error::Config(format!("distance must lie in [1, n/2], got {d}")));
    }
    let df = d as f64;
    let nf = n as f64;
    let (regime, label, value) = match hopping {
        Hopping::NearestNeighbor => (LrRegime::Linear, "O(D)", df),
        Hopping::PowerLaw(alpha) if alpha >= 2.0 => (LrRegime::Linear, "O(D)", df),
        Hopping::PowerLaw(alpha) if alpha > 1.0 => {
            (LrRegime::Sublinear, "O(D^(alpha-1))", df.powf(alpha - 1.0))
        }
        Hopping::PowerLaw(alpha) if alpha == 1.0 => (LrRegime::Logarithmic, "O(log D)", df.ln()),
        Hopping::PowerLaw(alpha) if alpha >= 0.5 => (LrRegime::Constant, "O(1)", 1.0),
        Hopping::PowerLaw(alpha) => {
            (LrRegime::SizeDependent, "O(N^(alpha-1/2))", nf.powf(alpha - 0.5))
        }
    };
    Ok(LrTimescale { regime, label, value })
}
