//! Special functions and summation primitives for the two-mode Fock ladder.
//!
//! Factorial-bearing magnitudes are carried in log space. Alternating sums
//! (the two-variable Hermite polynomial and the closed-form charge state
//! coefficients) lose up to ~20 decimal digits to cancellation at ladder
//! indices of a few dozen, so they are evaluated with double-double
//! arithmetic anchored at the largest term.

use std::ops::{Div, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::ddouble::{DdComplex, DoubleDouble};

/// Relative threshold below which an alternating sum is flagged as
/// cancellation limited.
pub const CANCELLATION_THRESHOLD: f64 = 1e-10;

const EXACT_FACTORIALS: usize = 20;
const LOG_FACTORIAL_TABLE: usize = 1024;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE + 1);
        let mut exact: u64 = 1;
        table.push(0.0);
        for k in 1..=EXACT_FACTORIALS as u64 {
            exact *= k;
            table.push((exact as f64).ln());
        }
        let mut acc = CompensatedSum::from(table[EXACT_FACTORIALS]);
        for k in EXACT_FACTORIALS + 1..=LOG_FACTORIAL_TABLE {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        table
    })
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    let table = log_factorial_table();
    match table.get(n as usize) {
        Some(v) => *v,
        None => statrs::function::gamma::ln_gamma(n as f64 + 1.0),
    }
}

/// `ln [n+|q|]!` where `[n+|q|]! = (1+|q|)(2+|q|)...(n+|q|) = (n+|q|)!/|q|!`.
///
/// The empty product (`n = 0`) is 1.
pub fn bracket_factorial_log(n: u64, q: i64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let aq = q.unsigned_abs();
    log_factorial(n + aq) - log_factorial(aq)
}

/// A signed magnitude stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMagnitude {
    sign: i8,
    log_abs: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogMagnitude = LogMagnitude {
        sign: 1,
        log_abs: 0.0,
    };

    /// Builds from a sign and log-magnitude; a `-inf` log or zero sign gives zero.
    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// `n!` as a log magnitude.
    pub fn factorial(n: u64) -> Self {
        Self::new(1, log_factorial(n))
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "square root of a negative magnitude");
        Self::new(self.sign, 0.5 * self.log_abs)
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }
}

impl Mul for LogMagnitude {
    type Output = LogMagnitude;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Div for LogMagnitude {
    type Output = LogMagnitude;

    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by a zero magnitude");
        Self::new(self.sign * rhs.sign, self.log_abs - rhs.log_abs)
    }
}

/// A complex value `mantissa * exp(log_scale)`, used where the linear-scale
/// value may overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        Self {
            mantissa: Complex64::new(0.0, 0.0),
            log_scale: 0.0,
        }
    }

    /// Natural log of the modulus (`-inf` for zero).
    pub fn log_abs(&self) -> f64 {
        let m = self.mantissa.norm();
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.ln() + self.log_scale
        }
    }

    /// Linear value multiplied by `exp(-log_ref)`.
    pub fn rescaled(&self, log_ref: f64) -> Complex64 {
        if self.mantissa == Complex64::new(0.0, 0.0) {
            return self.mantissa;
        }
        self.mantissa * (self.log_scale - log_ref).exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.rescaled(0.0)
    }
}

/// A summation result with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guarded<T> {
    pub value: T,
    /// `ln` of the largest term magnitude.
    pub log_max_term: f64,
    /// Set when `|sum| < CANCELLATION_THRESHOLD * max |term|`.
    pub cancellation_limited: bool,
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl From<f64> for CompensatedSum {
    fn from(x: f64) -> Self {
        Self { sum: x, comp: 0.0 }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated summation of complex values, component-wise.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Sums `terms[0..=last]` given the log-magnitude of every term and the exact
/// ratio between neighbours.
///
/// The largest term is set to its unit phase, the others are generated from
/// it by the ratio recurrences in double-double, and the sum is returned with
/// the factored-out scale. Ratios must be exact up to double-double rounding.
pub(crate) fn anchored_series<L, P, U, D>(
    last: u64,
    log_mag: L,
    phase_at: P,
    step_up: U,
    step_down: D,
) -> Guarded<ScaledComplex>
where
    L: Fn(u64) -> f64,
    P: Fn(u64) -> Complex64,
    U: Fn(u64, DdComplex) -> DdComplex,
    D: Fn(u64, DdComplex) -> DdComplex,
{
    let (peak, log_peak) =
        (0..=last)
            .map(|k| (k, log_mag(k)))
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
    if log_peak == f64::NEG_INFINITY {
        return Guarded {
            value: ScaledComplex::zero(),
            log_max_term: f64::NEG_INFINITY,
            cancellation_limited: false,
        };
    }

    let anchor = DdComplex::from(phase_at(peak));
    let mut total = anchor;
    let mut term = anchor;
    for k in peak..last {
        term = step_up(k, term);
        total = total + term;
    }
    term = anchor;
    for k in (1..=peak).rev() {
        term = step_down(k, term);
        total = total + term;
    }

    let mantissa = total.to_complex();
    Guarded {
        value: ScaledComplex {
            mantissa,
            log_scale: log_peak,
        },
        log_max_term: log_peak,
        cancellation_limited: mantissa.norm() < CANCELLATION_THRESHOLD,
    }
}

/// `H_{m,n}(z, z*)` in scaled form with cancellation metadata.
pub fn hermite_two_var_guarded(m: u64, n: u64, z: Complex64) -> Guarded<ScaledComplex> {
    // H = z^{m-K} z*^{n-K} * sum_k (-1)^k m! n! |z|^{2(K-k)} / (k! (m-k)! (n-k)!)
    let top = m.min(n);
    let abs2 = DoubleDouble::two_prod(z.re, z.re) + DoubleDouble::two_prod(z.im, z.im);
    let ln_abs = z.norm().ln();
    let fixed = log_factorial(m) + log_factorial(n);

    let log_mag = |k: u64| {
        let power = 2 * (top - k);
        let pow_term = if power == 0 {
            0.0
        } else {
            power as f64 * ln_abs
        };
        fixed - log_factorial(k) - log_factorial(m - k) - log_factorial(n - k) + pow_term
    };
    let sign = |k: u64| Complex64::new(if k.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    let up = |k: u64, t: DdComplex| {
        let num = ((m - k) as f64) * ((n - k) as f64);
        t.scale(-num).div_dd(abs2 * ((k + 1) as f64))
    };
    let down = |k: u64, t: DdComplex| {
        let den = ((m - k + 1) as f64) * ((n - k + 1) as f64);
        t.mul_dd(abs2).scale(-(k as f64)).div_f64(den)
    };
    let sum = anchored_series(top, log_mag, sign, up, down);

    // Common prefactor |z|^{m+n-2K} e^{i(m-n) arg z}.
    let power = m + n - 2 * top;
    let (pre_log, pre_phase) = if power == 0 {
        (0.0, 0.0)
    } else {
        (power as f64 * ln_abs, (m as f64 - n as f64) * z.arg())
    };
    if pre_log == f64::NEG_INFINITY {
        return Guarded {
            value: ScaledComplex::zero(),
            ..sum
        };
    }
    Guarded {
        value: ScaledComplex {
            mantissa: sum.value.mantissa * Complex64::from_polar(1.0, pre_phase),
            log_scale: sum.value.log_scale + pre_log,
        },
        log_max_term: sum.log_max_term + pre_log,
        ..sum
    }
}

/// Two-variable Hermite polynomial
/// `H_{m,n}(z, z*) = sum_k (-1)^k m! n! z^{m-k} z*^{n-k} / (k! (m-k)! (n-k)!)`.
pub fn hermite_two_var(m: u64, n: u64, z: Complex64) -> Complex64 {
    hermite_two_var_guarded(m, n, z).value.to_complex()
}
