//! Minimal double-double arithmetic (about 32 significant digits) built on
//! error-free transformations.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub(crate) fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub(crate) fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let p = Self::two_prod(q1, b);
        let r = (self - p).to_f64();
        let q2 = r / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    pub(crate) fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;

    fn mul(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p.hi, p.lo + self.lo * b);
        Self { hi, lo }
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let p = Self::two_prod(self.hi, rhs.hi);
        let (hi, lo) = quick_two_sum(p.hi, p.lo + (self.hi * rhs.lo + self.lo * rhs.hi));
        Self { hi, lo }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct DdComplex {
    re: DoubleDouble,
    im: DoubleDouble,
}

impl From<Complex64> for DdComplex {
    fn from(z: Complex64) -> Self {
        Self {
            re: DoubleDouble::new(z.re),
            im: DoubleDouble::new(z.im),
        }
    }
}

impl Add for DdComplex {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl DdComplex {
    pub(crate) fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub(crate) fn scale(self, s: f64) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub(crate) fn div_f64(self, s: f64) -> Self {
        Self {
            re: self.re.div_f64(s),
            im: self.im.div_f64(s),
        }
    }

    pub(crate) fn mul_dd(self, s: DoubleDouble) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub(crate) fn div_dd(self, s: DoubleDouble) -> Self {
        Self {
            re: self.re.div(s),
            im: self.im.div(s),
        }
    }

    pub(crate) fn mul_complex(self, z: Complex64) -> Self {
        Self {
            re: self.re * z.re - self.im * z.im,
            im: self.re * z.im + self.im * z.re,
        }
    }

    pub(crate) fn div_complex(self, z: Complex64) -> Self {
        let abs2 = DoubleDouble::two_prod(z.re, z.re) + DoubleDouble::two_prod(z.im, z.im);
        self.mul_complex(z.conj()).div_dd(abs2)
    }
}
