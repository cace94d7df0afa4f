//! Independent check of constructed states: apply the tridiagonal `G` and
//! measure how far the result is from `xi * state`.

use num_complex::Complex64;
use serde::Serialize;

use super::{build_deformed, ChargeState, Ladder, TruncationPolicy};
use crate::diagnostics::{moments, Diagnostic};
use crate::error::BuildError;
use crate::nonlinearity::Nonlinearity;

/// `G |state>` restricted to the truncated ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct GApplication {
    pub values: Vec<Complex64>,
    /// Amplitude that `G` pushes onto ladder index `n_max + 1`.
    pub leakage: Complex64,
}

pub fn apply_g(f: &Nonlinearity, state: &ChargeState) -> GApplication {
    apply_g_to(f, state.q(), state.coeffs())
}

/// `G` applied to a raw coefficient vector on the charge-`q` ladder.
pub fn apply_g_to(f: &Nonlinearity, q: i64, c: &[Complex64]) -> GApplication {
    assert!(!c.is_empty(), "empty coefficient vector");
    let ladder = Ladder::new(*f, q);
    let last = c.len() - 1;
    let values = (0..=last)
        .map(|n| {
            let mut v = c[n] * ladder.diag(n as u64);
            if n > 0 {
                v += c[n - 1] * ladder.coupling(n as u64);
            }
            if n < last {
                v += c[n + 1] * ladder.coupling(n as u64 + 1);
            }
            v
        })
        .collect();
    GApplication {
        values,
        leakage: c[last] * ladder.coupling(last as u64 + 1),
    }
}

/// Per-row residuals `|(G c - xi c)_n|`.
///
/// Rows `0..n_max` are enforced by the recursion; row `n_max` carries the
/// truncation leakage and is expected to be nonzero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<f64>,
    /// Each row divided by the sum of the magnitudes of its three terms;
    /// the backward error of the row, insensitive to the size of `d_n`.
    pub scaled_rows: Vec<f64>,
}

impl ResidualReport {
    pub fn interior(&self) -> &[f64] {
        &self.rows[..self.rows.len() - 1]
    }

    pub fn boundary(&self) -> f64 {
        *self.rows.last().unwrap()
    }

    pub fn max_interior(&self) -> f64 {
        self.interior().iter().copied().fold(0.0, f64::max)
    }

    pub fn max_interior_scaled(&self) -> f64 {
        self.scaled_rows[..self.scaled_rows.len() - 1]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn eigen_residual(f: &Nonlinearity, state: &ChargeState) -> ResidualReport {
    let ladder = Ladder::new(*f, state.q());
    let c = state.coeffs();
    let xi = state.xi();
    let g = apply_g(f, state);
    let last = c.len() - 1;
    let rows: Vec<f64> = g
        .values
        .iter()
        .zip(c)
        .map(|(gc, cn)| (gc - xi * cn).norm())
        .collect();
    let scaled_rows = (0..=last)
        .map(|n| {
            let mut size = (c[n] * (ladder.diag(n as u64) - xi)).norm();
            if n > 0 {
                size += (c[n - 1] * ladder.coupling(n as u64)).norm();
            }
            if n < last {
                size += (c[n + 1] * ladder.coupling(n as u64 + 1)).norm();
            }
            if size == 0.0 {
                0.0
            } else {
                rows[n] / size
            }
        })
        .collect();
    ResidualReport { rows, scaled_rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticChange {
    pub name: &'static str,
    pub at_n1: Option<f64>,
    pub at_n2: Option<f64>,
    pub relative_change: Option<f64>,
    pub converged: bool,
}

/// Cutoff sensitivity of a state between two ladder cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n1: u64,
    pub n2: u64,
    pub pre_norm_n1: f64,
    pub pre_norm_n2: f64,
    /// `ln(pre_norm_n2 / pre_norm_n1)`.
    pub log_pre_norm_growth: f64,
    pub diagnostics: Vec<DiagnosticChange>,
    /// Raw weight grew by more than a factor of 10 between the cutoffs.
    pub norm_divergent: bool,
}

impl ConvergenceReport {
    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&DiagnosticChange> {
        self.diagnostics.iter().find(|d| d.name == name)
    }
}

const TRACKED: [Diagnostic; 4] = [
    Diagnostic::MandelA,
    Diagnostic::G2A,
    Diagnostic::G12,
    Diagnostic::I0,
];

pub fn convergence_report(
    f: &Nonlinearity,
    q: i64,
    xi: Complex64,
    n1: u64,
    n2: u64,
    diag_tol: f64,
) -> Result<ConvergenceReport, BuildError> {
    if n1 < 3 || n1 >= n2 {
        return Err(BuildError::Precondition(format!(
            "cutoffs must satisfy 3 <= n1 < n2, got n1={n1} n2={n2}"
        )));
    }
    let low = build_deformed(f, q, xi, &TruncationPolicy::new(n1))?;
    let high = build_deformed(f, q, xi, &TruncationPolicy::new(n2))?;
    let (m1, m2) = (moments(&low), moments(&high));

    let change = |name: &'static str, a: Option<f64>, b: Option<f64>| {
        let relative_change = match (a, b) {
            (Some(a), Some(b)) => Some((b - a).abs() / a.abs().max(f64::MIN_POSITIVE)),
            _ => None,
        };
        let converged = match relative_change {
            Some(r) => r <= diag_tol,
            None => a.is_none() && b.is_none(),
        };
        DiagnosticChange {
            name,
            at_n1: a,
            at_n2: b,
            relative_change,
            converged,
        }
    };

    let mut diagnostics = vec![change("mean_na", Some(m1.mean_na), Some(m2.mean_na))];
    diagnostics.extend(
        TRACKED
            .iter()
            .map(|d| change(d.name(), d.evaluate(&m1), d.evaluate(&m2))),
    );
    let growth = high.log_pre_norm() - low.log_pre_norm();
    Ok(ConvergenceReport {
        n1,
        n2,
        pre_norm_n1: low.pre_norm(),
        pre_norm_n2: high.pre_norm(),
        log_pre_norm_growth: growth,
        diagnostics,
        norm_divergent: growth > 10f64.ln(),
    })
}
