use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Branch, ChargeState};
use crate::error::BuildError;
use crate::nonlinearity::{Nonlinearity, NonlinearityDoc};

/// Serialized state: `q, xi, f, branch, n_max, coeffs, pre_norm, rescale_count`.
///
/// `xi` and each coefficient are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub q: i64,
    pub xi: [f64; 2],
    pub f: NonlinearityDoc,
    pub branch: String,
    pub n_max: u64,
    pub coeffs: Vec<[f64; 2]>,
    pub pre_norm: f64,
    pub rescale_count: u32,
}

impl From<&ChargeState> for StateDocument {
    fn from(s: &ChargeState) -> Self {
        Self {
            q: s.q,
            xi: [s.xi.re, s.xi.im],
            f: NonlinearityDoc::from(&s.f),
            branch: s.branch.as_str().to_string(),
            n_max: s.n_max,
            coeffs: s.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            pre_norm: s.pre_norm(),
            rescale_count: s.rescale_count,
        }
    }
}

impl TryFrom<StateDocument> for ChargeState {
    type Error = BuildError;

    fn try_from(doc: StateDocument) -> Result<Self, Self::Error> {
        let f =
            Nonlinearity::try_from(doc.f).map_err(|e| BuildError::Precondition(e.to_string()))?;
        let branch = Branch::for_charge(doc.q);
        if doc.branch != branch.as_str() {
            return Err(BuildError::Precondition(format!(
                "branch `{}` inconsistent with charge {}",
                doc.branch, doc.q
            )));
        }
        if doc.coeffs.len() as u64 != doc.n_max + 1 {
            return Err(BuildError::Precondition(format!(
                "expected {} coefficients, found {}",
                doc.n_max + 1,
                doc.coeffs.len()
            )));
        }
        let coeffs: Vec<Complex64> = doc
            .coeffs
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(BuildError::Precondition(format!(
                "coefficients not normalized (sum |c|^2 = {norm})"
            )));
        }
        Ok(ChargeState {
            q: doc.q,
            xi: Complex64::new(doc.xi[0], doc.xi[1]),
            f,
            branch,
            n_max: doc.n_max,
            coeffs,
            log_pre_norm: doc.pre_norm.ln(),
            rescale_count: doc.rescale_count,
        })
    }
}
