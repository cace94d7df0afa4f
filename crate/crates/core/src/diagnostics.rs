//! Photon-number moments and nonclassicality criteria of a charge state.
//!
//! Every quantity is a weighted sum over the truncated ladder with weights
//! `|c_n|^2` and mode occupations `(n_a, n_b)` taken from the branch. A
//! criterion whose denominator vanishes is reported as `None`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::fock_math::CompensatedSum;
use crate::state::ChargeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Fock-basis expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub mean_na: f64,
    pub mean_na2: f64,
    pub mean_nb: f64,
    pub mean_nb2: f64,
    /// `<a^dag^2 a^2>`
    pub aa_corr: f64,
    /// `<b^dag^2 b^2>`
    pub bb_corr: f64,
    /// `<n_a n_b>`
    pub cross: f64,
}

pub fn moments(state: &ChargeState) -> MomentSet {
    let mut acc = [CompensatedSum::new(); 7];
    for (n, c) in state.coeffs().iter().enumerate() {
        let w = c.norm_sqr();
        let (na, nb) = state.occupations(n as u64);
        let (a, b) = (na as f64, nb as f64);
        let terms = [a, a * a, b, b * b, a * (a - 1.0), b * (b - 1.0), a * b];
        for (s, t) in acc.iter_mut().zip(terms) {
            s.add(w * t);
        }
    }
    let v = acc.map(|s| s.value());
    MomentSet {
        mean_na: v[0],
        mean_na2: v[1],
        mean_nb: v[2],
        mean_nb2: v[3],
        aa_corr: v[4],
        bb_corr: v[5],
        cross: v[6],
    }
}

impl MomentSet {
    fn mode(&self, mode: Mode) -> (f64, f64, f64) {
        match mode {
            Mode::A => (self.mean_na, self.mean_na2, self.aa_corr),
            Mode::B => (self.mean_nb, self.mean_nb2, self.bb_corr),
        }
    }

    /// `(<n^2> - <n>^2) / <n> - 1`.
    pub fn mandel(&self, mode: Mode) -> Option<f64> {
        let (mean, mean2, _) = self.mode(mode);
        (mean != 0.0).then(|| (mean2 - mean * mean) / mean - 1.0)
    }

    /// `<x^dag^2 x^2> / <n_x>^2`.
    pub fn g2(&self, mode: Mode) -> Option<f64> {
        let (mean, _, corr) = self.mode(mode);
        (mean != 0.0).then(|| corr / (mean * mean))
    }

    /// `<n_a n_b> / (<n_a> <n_b>)`.
    pub fn g12(&self) -> Option<f64> {
        (self.mean_na != 0.0 && self.mean_nb != 0.0)
            .then(|| self.cross / (self.mean_na * self.mean_nb))
    }

    /// Cauchy-Schwartz parameter `sqrt(<a^dag^2 a^2><b^dag^2 b^2>) / |<n_a n_b>| - 1`.
    pub fn cauchy_schwartz(&self) -> Option<f64> {
        (self.cross != 0.0).then(|| (self.aa_corr * self.bb_corr).sqrt() / self.cross.abs() - 1.0)
    }

    /// `((dx)^2, (dp)^2)` of mode `a`. On a fixed-charge ladder
    /// `<a> = <a^2> = 0`, leaving `<n_a> + 1/2` for both.
    pub fn quadrature_variance(&self) -> (f64, f64) {
        let v = self.mean_na + 0.5;
        (v, v)
    }
}

pub fn mandel(state: &ChargeState, mode: Mode) -> Option<f64> {
    moments(state).mandel(mode)
}

pub fn g2(state: &ChargeState, mode: Mode) -> Option<f64> {
    moments(state).g2(mode)
}

pub fn g12(state: &ChargeState) -> Option<f64> {
    moments(state).g12()
}

pub fn cauchy_schwartz(state: &ChargeState) -> Option<f64> {
    moments(state).cauchy_schwartz()
}

pub fn quadrature_variance(state: &ChargeState) -> (f64, f64) {
    moments(state).quadrature_variance()
}

/// All six criteria plus the quadrature variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub mandel_a: Option<f64>,
    pub mandel_b: Option<f64>,
    pub g2_a: Option<f64>,
    pub g2_b: Option<f64>,
    pub g12: Option<f64>,
    pub i0: Option<f64>,
    pub dx2: f64,
    pub dp2: f64,
}

impl DiagnosticsReport {
    pub fn from_moments(m: &MomentSet) -> Self {
        let (dx2, dp2) = m.quadrature_variance();
        Self {
            mandel_a: m.mandel(Mode::A),
            mandel_b: m.mandel(Mode::B),
            g2_a: m.g2(Mode::A),
            g2_b: m.g2(Mode::B),
            g12: m.g12(),
            i0: m.cauchy_schwartz(),
            dx2,
            dp2,
        }
    }

    pub fn of(state: &ChargeState) -> Self {
        Self::from_moments(&moments(state))
    }
}

/// Selector for one criterion, as used by parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Diagnostic {
    MandelA,
    MandelB,
    G2A,
    G2B,
    G12,
    I0,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 6] = [
        Self::MandelA,
        Self::MandelB,
        Self::G2A,
        Self::G2B,
        Self::G12,
        Self::I0,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::MandelA => "mandel_a",
            Self::MandelB => "mandel_b",
            Self::G2A => "g2_a",
            Self::G2B => "g2_b",
            Self::G12 => "g12",
            Self::I0 => "i0",
        }
    }

    pub fn evaluate(&self, m: &MomentSet) -> Option<f64> {
        match self {
            Self::MandelA => m.mandel(Mode::A),
            Self::MandelB => m.mandel(Mode::B),
            Self::G2A => m.g2(Mode::A),
            Self::G2B => m.g2(Mode::B),
            Self::G12 => m.g12(),
            Self::I0 => m.cauchy_schwartz(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Diagnostic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown diagnostic `{s}`"))
    }
}

/// One row of the photon-number distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonCount {
    pub n: u64,
    pub na: u64,
    pub nb: u64,
    pub p: f64,
}

pub fn photon_distribution(state: &ChargeState) -> Vec<PhotonCount> {
    state
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let (na, nb) = state.occupations(n as u64);
            PhotonCount {
                n: n as u64,
                na,
                nb,
                p: c.norm_sqr(),
            }
        })
        .collect()
}

/// Indices of strict interior local maxima of `p`.
pub fn local_maxima(dist: &[PhotonCount]) -> Vec<u64> {
    dist.windows(3)
        .filter(|w| w[1].p > w[0].p && w[1].p > w[2].p)
        .map(|w| w[1].n)
        .collect()
}
