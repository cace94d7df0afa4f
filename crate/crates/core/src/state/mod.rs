//! Fixed-charge two-mode states and their construction.
//!
//! A state of charge `q` lives on the ladder `|n+q, n>` (plus branch, `q >= 0`)
//! or `|n, n-q>` (minus branch, `q <= 0`), indexed by `n = 0..=n_max`. In that
//! basis the deformed operator `G = (A + B^dag)(A^dag + B)` is tridiagonal
//! with diagonal `d_n = (n_a+1) f^2(n_a+1) + n_b f^2(n_b)` and coupling
//! `t_n = sqrt(n_a n_b) f(n_a) f(n_b)` between ladder indices `n-1` and `n`,
//! where `(n_a, n_b)` are the mode occupations at index `n`.
//!
//! `G` is real symmetric for real `f`, so a normalizable eigenvector of the
//! untruncated ladder needs a real eigenvalue. Complex `xi` is still accepted:
//! the recursion is well defined and truncation makes the vector finite.

mod build;
mod document;
mod oracle;

use num_complex::Complex64;

use crate::error::BuildError;
use crate::fock_math::CompensatedSum;
use crate::nonlinearity::Nonlinearity;

pub use build::{
    build_continued_fraction, build_deformed, build_hermite_reference, build_linear_closed,
    closed_form_coefficient, continued_fraction_bn,
};
pub use document::StateDocument;
pub use oracle::{
    apply_g, apply_g_to, convergence_report, eigen_residual, ConvergenceReport, DiagnosticChange,
    GApplication, ResidualReport,
};

/// Coefficients above this magnitude trigger a rescale of the whole vector.
pub const RESCALE_THRESHOLD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `q >= 0`, ladder `|n+q, n>`.
    Plus,
    /// `q <= 0`, ladder `|n, n-q>`.
    Minus,
}

impl Branch {
    /// `q = 0` is assigned to the plus branch.
    pub fn for_charge(q: i64) -> Self {
        if q >= 0 {
            Self::Plus
        } else {
            Self::Minus
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
        }
    }

    /// Mode occupations `(n_a, n_b)` of ladder index `n`.
    pub fn occupations(&self, q: i64, n: u64) -> (u64, u64) {
        let aq = q.unsigned_abs();
        match self {
            Self::Plus => (n + aq, n),
            Self::Minus => (n, n + aq),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Inclusive ladder cutoff.
    pub n_max: u64,
    pub residual_tol: f64,
    pub convergence_tol: f64,
}

impl TruncationPolicy {
    pub fn new(n_max: u64) -> Self {
        Self {
            n_max,
            residual_tol: 1e-9,
            convergence_tol: 1e-3,
        }
    }

    pub fn with_tolerances(mut self, residual_tol: f64, convergence_tol: f64) -> Self {
        assert!(residual_tol > 0.0 && convergence_tol > 0.0);
        self.residual_tol = residual_tol;
        self.convergence_tol = convergence_tol;
        self
    }
}

/// Matrix elements of `G` on one fixed-charge ladder.
#[derive(Debug, Clone, Copy)]
pub struct Ladder {
    f: Nonlinearity,
    q: i64,
    branch: Branch,
}

impl Ladder {
    pub fn new(f: Nonlinearity, q: i64) -> Self {
        Self {
            f,
            q,
            branch: Branch::for_charge(q),
        }
    }

    pub fn occupations(&self, n: u64) -> (u64, u64) {
        self.branch.occupations(self.q, n)
    }

    /// Diagonal element `d_n`.
    pub fn diag(&self, n: u64) -> f64 {
        let (na, nb) = self.occupations(n);
        let a_part = (na + 1) as f64 * self.f.eval_sq(na + 1);
        let b_part = if nb == 0 {
            0.0
        } else {
            nb as f64 * self.f.eval_sq(nb)
        };
        a_part + b_part
    }

    /// Coupling `t_n` between indices `n-1` and `n`; zero for `n = 0`.
    pub fn coupling(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let (na, nb) = self.occupations(n);
        ((na as f64) * (nb as f64)).sqrt() * self.f.eval(na) * self.f.eval(nb)
    }

    /// Checks that every coupling `t_1..=t_{n_max}` is finite and nonzero.
    pub(crate) fn check_couplings(&self, n_max: u64) -> Result<(), BuildError> {
        for n in 1..=n_max {
            let t = self.coupling(n);
            if !t.is_finite() || !self.diag(n - 1).is_finite() {
                return Err(BuildError::NonFinite { index: n });
            }
            if t == 0.0 {
                return Err(BuildError::VanishingDenominator { index: n });
            }
        }
        Ok(())
    }
}

/// A normalized coefficient vector on a fixed-charge ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeState {
    q: i64,
    xi: Complex64,
    f: Nonlinearity,
    branch: Branch,
    n_max: u64,
    coeffs: Vec<Complex64>,
    log_pre_norm: f64,
    rescale_count: u32,
}

impl ChargeState {
    /// Normalizes `raw * exp(log_scale)` into a state.
    pub(crate) fn from_scaled(
        q: i64,
        xi: Complex64,
        f: Nonlinearity,
        mut raw: Vec<Complex64>,
        mut log_scale: f64,
        rescale_count: u32,
    ) -> Result<Self, BuildError> {
        assert!(!raw.is_empty());
        let peak = raw.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 || !peak.is_finite() {
            return Err(BuildError::Degenerate);
        }
        raw.iter_mut().for_each(|c| *c /= peak);
        log_scale += peak.ln();
        let norm2 = raw
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<CompensatedSum>()
            .value();
        let inv = 1.0 / norm2.sqrt();
        raw.iter_mut().for_each(|c| *c *= inv);
        Ok(Self {
            q,
            xi,
            f,
            branch: Branch::for_charge(q),
            n_max: raw.len() as u64 - 1,
            coeffs: raw,
            log_pre_norm: norm2.ln() + 2.0 * log_scale,
            rescale_count,
        })
    }

    /// Wraps an arbitrary (unnormalized) coefficient vector, e.g. an injected
    /// test distribution. `xi` and `f` are carried as labels only.
    pub fn from_coefficients(
        q: i64,
        xi: Complex64,
        f: Nonlinearity,
        raw: Vec<Complex64>,
    ) -> Result<Self, BuildError> {
        if raw.is_empty() {
            return Err(BuildError::Precondition("empty coefficient vector".into()));
        }
        Self::from_scaled(q, xi, f, raw, 0.0, 0)
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `sum |raw c_n|^2` with `c_0 = 1`, before normalization. May be `inf`
    /// when the raw weights exceed double range; see [`Self::log_pre_norm`].
    pub fn pre_norm(&self) -> f64 {
        self.log_pre_norm.exp()
    }

    pub fn log_pre_norm(&self) -> f64 {
        self.log_pre_norm
    }

    pub fn rescale_count(&self) -> u32 {
        self.rescale_count
    }

    /// Mode occupations `(n_a, n_b)` of ladder index `n`.
    pub fn occupations(&self, n: u64) -> (u64, u64) {
        self.branch.occupations(self.q, n)
    }

    pub fn ladder(&self) -> Ladder {
        Ladder::new(self.f, self.q)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<CompensatedSum>()
            .value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_follows_charge_sign() {
        assert_eq!(Branch::for_charge(0), Branch::Plus);
        assert_eq!(Branch::for_charge(3), Branch::Plus);
        assert_eq!(Branch::for_charge(-1), Branch::Minus);
        assert_eq!(Branch::Plus.occupations(2, 5), (7, 5));
        assert_eq!(Branch::Minus.occupations(-2, 5), (5, 7));
    }

    #[test]
    fn zero_charge_branches_coincide() {
        for n in 0..30 {
            assert_eq!(
                Branch::Plus.occupations(0, n),
                Branch::Minus.occupations(0, n)
            );
        }
        // the minus-branch bottom term at q = 0 reduces to the plus-branch one
        let f = Nonlinearity::q_deformed(7.0).unwrap();
        let l = Ladder::new(f, 0);
        assert_eq!(l.diag(0), f.eval_sq(1));
    }

    #[test]
    fn ladder_elements_unity() {
        let l = Ladder::new(Nonlinearity::Unity, 2);
        assert_eq!(l.diag(0), 3.0);
        assert!((l.coupling(1) - 3f64.sqrt()).abs() < 1e-15);
        let l0 = Ladder::new(Nonlinearity::Unity, 0);
        for n in 0..20 {
            assert_eq!(l0.diag(n), (2 * n + 1) as f64);
        }
    }

    #[test]
    fn minus_branch_bottom_term() {
        // d_0 = f^2(1) + (-q) f^2(-q) on |0, -q>
        let f = Nonlinearity::penson_solomon(0.5).unwrap();
        let l = Ladder::new(f, -2);
        assert!((l.diag(0) - (f.eval_sq(1) + 2.0 * f.eval_sq(2))).abs() < 1e-14);
        let t1 = (1.0f64 * 3.0).sqrt() * f.eval(1) * f.eval(3);
        assert!((l.coupling(1) - t1).abs() < 1e-14);
    }

    #[test]
    fn injected_vector_is_normalized() {
        let raw = vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)];
        let s =
            ChargeState::from_coefficients(1, Complex64::new(0.0, 0.0), Nonlinearity::Unity, raw)
                .unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.pre_norm() - 25.0).abs() < 1e-12);
        assert_eq!(s.n_max(), 1);
        let zero = vec![Complex64::new(0.0, 0.0); 3];
        assert_eq!(
            ChargeState::from_coefficients(0, Complex64::new(0.0, 0.0), Nonlinearity::Unity, zero),
            Err(BuildError::Degenerate)
        );
    }
}
