use num_complex::Complex64;

use super::{ChargeState, Ladder, TruncationPolicy, RESCALE_THRESHOLD};
use crate::error::BuildError;
use crate::fock_math::{
    anchored_series, bracket_factorial_log, hermite_two_var_guarded, log_factorial, Guarded,
    ScaledComplex,
};
use crate::nonlinearity::Nonlinearity;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Coefficient vector that divides itself down whenever an entry exceeds
/// [`RESCALE_THRESHOLD`].
struct ScaledVec {
    coeffs: Vec<Complex64>,
    log_scale: f64,
    rescales: u32,
}

impl ScaledVec {
    fn with_capacity(n: usize) -> Self {
        Self {
            coeffs: Vec::with_capacity(n),
            log_scale: 0.0,
            rescales: 0,
        }
    }

    fn push(&mut self, c: Complex64) {
        self.coeffs.push(c);
        let m = c.norm();
        if m > RESCALE_THRESHOLD && m.is_finite() {
            self.coeffs.iter_mut().for_each(|x| *x /= m);
            self.log_scale += m.ln();
            self.rescales += 1;
        }
    }

    fn last(&self, back: usize) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1 - back]
    }

    fn finish(self, q: i64, xi: Complex64, f: Nonlinearity) -> Result<ChargeState, BuildError> {
        ChargeState::from_scaled(q, xi, f, self.coeffs, self.log_scale, self.rescales)
    }
}

/// Builds the deformed charge coherent state by forward three-term recursion
/// `t_n c_n = (xi - d_{n-1}) c_{n-1} - t_{n-1} c_{n-2}` from `c_{-1} = 0`,
/// `c_0 = 1`, then normalizes.
pub fn build_deformed(
    f: &Nonlinearity,
    q: i64,
    xi: Complex64,
    trunc: &TruncationPolicy,
) -> Result<ChargeState, BuildError> {
    let ladder = Ladder::new(*f, q);
    ladder.check_couplings(trunc.n_max)?;
    let mut v = ScaledVec::with_capacity(trunc.n_max as usize + 1);
    v.push(ONE);
    for n in 1..=trunc.n_max {
        let prev = v.last(0);
        let prev2 = if n >= 2 { v.last(1) } else { ZERO };
        // ratios keep the intermediates in range when d_n and t_n are huge
        let t = ladder.coupling(n);
        let c = prev * ((xi - ladder.diag(n - 1)) / t) - prev2 * (ladder.coupling(n - 1) / t);
        if !c.is_finite() {
            return Err(BuildError::NonFinite { index: n });
        }
        v.push(c);
    }
    v.finish(q, xi, *f)
}

/// Evaluates `D_1 = xi - d_0`, `D_k = (xi - d_{k-1}) - t_{k-1}^2 / D_{k-1}`
/// for levels `1..=n`. `D_k = t_k B_k`.
///
/// An exact zero `D_k` (a vanishing `c_k`) makes `D_{k+1}` infinite, stored
/// as `None`, and the level after that restarts at `xi - d_{k+1}`.
fn continued_fraction_levels(ladder: &Ladder, xi: Complex64, n: u64) -> Vec<Option<Complex64>> {
    let mut levels = Vec::with_capacity(n as usize);
    let mut d_prev = Some(xi - ladder.diag(0));
    levels.push(d_prev);
    for k in 2..=n {
        let t = ladder.coupling(k - 1);
        let d = match d_prev {
            Some(z) if z == ZERO => None,
            Some(z) => Some((xi - ladder.diag(k - 1)) - t * (t / z)),
            None => Some(xi - ladder.diag(k - 1)),
        };
        levels.push(d);
        d_prev = d;
    }
    levels
}

/// Ratio `B_n = c_n / c_{n-1}` from the nested continued fraction, evaluated
/// from its innermost level `[xi - d_0]` outwards. `B_0 = 1`.
pub fn continued_fraction_bn(
    f: &Nonlinearity,
    q: i64,
    xi: Complex64,
    n: u64,
) -> Result<Complex64, BuildError> {
    if n == 0 {
        return Ok(ONE);
    }
    let ladder = Ladder::new(*f, q);
    ladder.check_couplings(n)?;
    match continued_fraction_levels(&ladder, xi, n)[n as usize - 1] {
        Some(d) => Ok(d / ladder.coupling(n)),
        None => Err(BuildError::Pole {
            n,
            level: n - 1,
            depth: 1,
        }),
    }
}

/// Builds the state from the product form `c_n = [B_n]! c_0`.
///
/// Independent of [`build_deformed`] in that only ratios are propagated; it
/// fails wherever a coefficient vanishes exactly.
pub fn build_continued_fraction(
    f: &Nonlinearity,
    q: i64,
    xi: Complex64,
    trunc: &TruncationPolicy,
) -> Result<ChargeState, BuildError> {
    let ladder = Ladder::new(*f, q);
    ladder.check_couplings(trunc.n_max)?;
    let mut v = ScaledVec::with_capacity(trunc.n_max as usize + 1);
    v.push(ONE);
    let levels = continued_fraction_levels(&ladder, xi, trunc.n_max);
    for (k, d) in (1..=trunc.n_max).zip(levels) {
        let Some(d) = d else {
            return Err(BuildError::Pole {
                n: k,
                level: k - 1,
                depth: 1,
            });
        };
        let c = v.last(0) * (d / ladder.coupling(k));
        v.push(c);
    }
    v.finish(q, xi, *f)
}

/// Raw closed-form linear coefficient
/// `sqrt([n+|q|]! n!) sum_k (-1)^k xi^{n-k} / (k! [n+|q|-k]! (n-k)!)`
/// (with `c_0 = 1`), in scaled form.
pub fn closed_form_coefficient(n: u64, q: i64, xi: Complex64) -> Guarded<ScaledComplex> {
    let aq = q.unsigned_abs();
    let ln_xi = xi.norm().ln();
    let arg_xi = xi.arg();
    let log_mag = |k: u64| {
        let power = n - k;
        let pow_term = if power == 0 {
            0.0
        } else {
            power as f64 * ln_xi
        };
        pow_term - log_factorial(k) - bracket_factorial_log(n - k, q) - log_factorial(n - k)
    };
    let phase = |k: u64| {
        let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Complex64::from_polar(s, (n - k) as f64 * arg_xi)
    };
    let up = |k: u64, t: crate::ddouble::DdComplex| {
        let num = ((n - k) as f64) * ((n + aq - k) as f64);
        t.scale(-num).div_f64((k + 1) as f64).div_complex(xi)
    };
    let down = |k: u64, t: crate::ddouble::DdComplex| {
        let den = ((n + aq - k + 1) as f64) * ((n - k + 1) as f64);
        t.mul_complex(xi).scale(-(k as f64)).div_f64(den)
    };
    let sum = anchored_series(n, log_mag, phase, up, down);
    let pre = 0.5 * (bracket_factorial_log(n, q) + log_factorial(n));
    Guarded {
        value: ScaledComplex {
            mantissa: sum.value.mantissa,
            log_scale: sum.value.log_scale + pre,
        },
        log_max_term: sum.log_max_term + pre,
        ..sum
    }
}

fn from_scaled_entries(
    q: i64,
    xi: Complex64,
    f: Nonlinearity,
    entries: &[ScaledComplex],
) -> Result<ChargeState, BuildError> {
    let log_ref = entries
        .iter()
        .map(ScaledComplex::log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if log_ref == f64::NEG_INFINITY || log_ref.is_nan() {
        return Err(BuildError::Degenerate);
    }
    let raw = entries.iter().map(|e| e.rescaled(log_ref)).collect();
    ChargeState::from_scaled(q, xi, f, raw, log_ref, 0)
}

/// Linear (`f = 1`) charge coherent state from the explicit double sum.
pub fn build_linear_closed(
    q: i64,
    xi: Complex64,
    trunc: &TruncationPolicy,
) -> Result<ChargeState, BuildError> {
    let entries: Vec<ScaledComplex> = (0..=trunc.n_max)
        .map(|n| closed_form_coefficient(n, q, xi).value)
        .collect();
    from_scaled_entries(q, xi, Nonlinearity::Unity, &entries)
}

/// Reference state with raw coefficients `H_{n_a,n_b}(sqrt l, sqrt l) / sqrt(n_a! n_b!)`.
///
/// The global `exp(-l/2)` factor is dropped; normalization absorbs it. The
/// state is an eigenvector of the linear `g` with eigenvalue `l`, so it is
/// labelled `xi = l`.
pub fn build_hermite_reference(
    q: i64,
    lambda: f64,
    trunc: &TruncationPolicy,
) -> Result<ChargeState, BuildError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(BuildError::Precondition(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let branch = super::Branch::for_charge(q);
    let z = Complex64::new(lambda.sqrt(), 0.0);
    let entries: Vec<ScaledComplex> = (0..=trunc.n_max)
        .map(|n| {
            let (na, nb) = branch.occupations(q, n);
            let h = hermite_two_var_guarded(na, nb, z).value;
            ScaledComplex {
                mantissa: h.mantissa,
                log_scale: h.log_scale - 0.5 * (log_factorial(na) + log_factorial(nb)),
            }
        })
        .collect();
    from_scaled_entries(
        q,
        Complex64::new(lambda, 0.0),
        Nonlinearity::Unity,
        &entries,
    )
}
