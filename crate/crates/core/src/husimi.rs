//! Two-mode Husimi function `Q(a1, a2) = |<a1, a2|psi>|^2 / pi`.
//!
//! The single `1/pi` prefactor is kept for the two-mode function, so the
//! phase-space integral of `Q` over both modes is `pi`, not 1.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HusimiError;
use crate::fock_math::{log_factorial, CompensatedComplexSum, CompensatedSum};
use crate::state::ChargeState;

/// Default Monte-Carlo seed.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;
const BATCH: usize = 8192;

#[derive(Debug, Clone, Copy)]
struct Term {
    log_abs: f64,
    arg: f64,
    na: u64,
    nb: u64,
}

/// Per-state data for repeated Husimi evaluation.
#[derive(Debug, Clone)]
pub struct HusimiKernel {
    terms: Vec<Term>,
}

impl HusimiKernel {
    pub fn new(state: &ChargeState) -> Self {
        let terms = state
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(n, c)| {
                let (na, nb) = state.occupations(n as u64);
                Term {
                    log_abs: c.norm().ln() - 0.5 * (log_factorial(na) + log_factorial(nb)),
                    arg: c.arg(),
                    na,
                    nb,
                }
            })
            .collect();
        Self { terms }
    }

    /// `Q(alpha1, alpha2)`, reusing `buf` for the per-term exponents.
    pub fn eval_with(&self, alpha1: Complex64, alpha2: Complex64, buf: &mut Vec<f64>) -> f64 {
        let (lr1, th1) = (alpha1.norm().ln(), alpha1.arg());
        let (lr2, th2) = (alpha2.norm().ln(), alpha2.arg());
        let power = |k: u64, lr: f64| if k == 0 { 0.0 } else { k as f64 * lr };

        buf.clear();
        buf.extend(
            self.terms
                .iter()
                .map(|t| t.log_abs + power(t.na, lr1) + power(t.nb, lr2)),
        );
        let peak = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut sum = CompensatedComplexSum::new();
        for (t, &e) in self.terms.iter().zip(buf.iter()) {
            if e == f64::NEG_INFINITY {
                continue;
            }
            let phase = t.arg - t.na as f64 * th1 - t.nb as f64 * th2;
            sum.add(Complex64::from_polar((e - peak).exp(), phase));
        }
        let s = sum.value().norm();
        if s == 0.0 {
            return 0.0;
        }
        let r2 = alpha1.norm_sqr() + alpha2.norm_sqr();
        (2.0 * (peak + s.ln()) - r2 - std::f64::consts::PI.ln()).exp()
    }

    pub fn eval(&self, alpha1: Complex64, alpha2: Complex64) -> f64 {
        self.eval_with(alpha1, alpha2, &mut Vec::with_capacity(self.terms.len()))
    }
}

pub fn husimi_point(state: &ChargeState, alpha1: Complex64, alpha2: Complex64) -> f64 {
    HusimiKernel::new(state).eval(alpha1, alpha2)
}

/// Evenly spaced axis `min, ..., max` with `count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }
}

/// `Q` sampled over the `alpha1` plane at fixed `alpha2`.
///
/// `values[iy * x_range.count + ix]` holds `Q(x_ix + i y_iy, alpha2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HusimiGrid {
    pub alpha2: Complex64,
    pub x_range: AxisRange,
    pub y_range: AxisRange,
    pub values: Vec<f64>,
}

impl HusimiGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.x_range.count + ix]
    }

    /// `(x, y, q)` triples in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nx = self.x_range.count;
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.x_range.node(k % nx), self.y_range.node(k / nx), v))
    }
}

pub fn husimi_grid(
    state: &ChargeState,
    alpha2: Complex64,
    x_range: AxisRange,
    y_range: AxisRange,
) -> Result<HusimiGrid, HusimiError> {
    for (axis, r) in [("x", &x_range), ("y", &y_range)] {
        if r.count < 2 {
            return Err(HusimiError::Precondition(format!(
                "{axis} axis needs at least 2 nodes, got {}",
                r.count
            )));
        }
        if !(r.min.is_finite() && r.max.is_finite()) {
            return Err(HusimiError::Precondition(format!(
                "{axis} range must be finite"
            )));
        }
    }
    let kernel = HusimiKernel::new(state);
    let values = (0..y_range.count)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let y = y_range.node(iy);
            let mut buf = Vec::new();
            (0..x_range.count)
                .map(|ix| {
                    let a1 = Complex64::new(x_range.node(ix), y);
                    kernel.eval_with(a1, alpha2, &mut buf)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(HusimiGrid {
        alpha2,
        x_range,
        y_range,
        values,
    })
}

/// Monte-Carlo estimate of the integral of `Q` over the 4-ball
/// `|a1|^2 + |a2|^2 <= radius^2`, with [`DEFAULT_SEED`].
pub fn husimi_norm_check(
    state: &ChargeState,
    samples: usize,
    radius: f64,
) -> Result<f64, HusimiError> {
    husimi_norm_check_seeded(state, samples, radius, DEFAULT_SEED)
}

/// As [`husimi_norm_check`] with an explicit seed. Samples are drawn in
/// fixed-size batches, batch `b` from stream `b` of the seeded generator, so
/// the estimate does not depend on the thread count.
pub fn husimi_norm_check_seeded(
    state: &ChargeState,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<f64, HusimiError> {
    if samples < 10_000 {
        return Err(HusimiError::Precondition(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(HusimiError::Precondition(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let kernel = HusimiKernel::new(state);
    let batches = samples.div_ceil(BATCH);
    let partials: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let take = BATCH.min(samples - b * BATCH);
            let mut buf = Vec::new();
            let mut acc = CompensatedSum::new();
            for _ in 0..take {
                let (a1, a2) = sample_ball(&mut rng, radius);
                acc.add(kernel.eval_with(a1, a2, &mut buf));
            }
            acc.value()
        })
        .collect();
    let total: CompensatedSum = partials.into_iter().collect();
    let volume = std::f64::consts::PI.powi(2) * radius.powi(4) / 2.0;
    Ok(volume * total.value() / samples as f64)
}

fn sample_ball(rng: &mut ChaCha8Rng, radius: f64) -> (Complex64, Complex64) {
    loop {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(0.25) / norm;
        return (
            Complex64::new(g[0] * r, g[1] * r),
            Complex64::new(g[2] * r, g[3] * r),
        );
    }
}
