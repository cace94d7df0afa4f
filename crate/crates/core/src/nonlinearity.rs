//! Intensity-dependent deformation functions `f(n)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::NonlinearityError;

/// Catalog of deformation functions evaluated at nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(n) = 1`; the linear (undeformed) case.
    Unity,
    /// `f(n) = p^(1-n)` with `p` in `(0, 1]`.
    PensonSolomon { p: f64 },
    /// `f(n) = sqrt(n)`, the intensity-dependent coupling.
    IntensitySqrt,
    /// `f(n) = sqrt((Q^n - Q^-n) / (n (Q - Q^-1)))`, `f(0) = 1`.
    QDeformed { q: f64 },
}

/// `ln sinh(x)` for `x > 0`, safe for large `x`.
fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

impl Nonlinearity {
    pub fn penson_solomon(p: f64) -> Result<Self, NonlinearityError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(NonlinearityError::Range {
                param: "p",
                value: p,
                allowed: "(0, 1]",
            });
        }
        Ok(Self::PensonSolomon { p })
    }

    pub fn q_deformed(q: f64) -> Result<Self, NonlinearityError> {
        if !(q > 0.0 && q.is_finite()) || q == 1.0 {
            return Err(NonlinearityError::Range {
                param: "q",
                value: q,
                allowed: "(0, 1) or (1, inf)",
            });
        }
        Ok(Self::QDeformed { q })
    }

    /// Catalog name used in serialized documents.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Unity => "unity",
            Self::PensonSolomon { .. } => "penson_solomon",
            Self::IntensitySqrt => "intensity_sqrt",
            Self::QDeformed { .. } => "q_deformed",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        match *self {
            Self::PensonSolomon { p } => BTreeMap::from([("p".to_string(), p)]),
            Self::QDeformed { q } => BTreeMap::from([("q".to_string(), q)]),
            Self::Unity | Self::IntensitySqrt => BTreeMap::new(),
        }
    }

    /// `f(n)`.
    pub fn eval(&self, n: u64) -> f64 {
        match *self {
            Self::Unity => 1.0,
            Self::IntensitySqrt => (n as f64).sqrt(),
            Self::PensonSolomon { .. } | Self::QDeformed { .. } => self.eval_sq(n).sqrt(),
        }
    }

    /// `f(n)^2`, evaluated without an intermediate square root where possible.
    pub fn eval_sq(&self, n: u64) -> f64 {
        match *self {
            Self::Unity => 1.0,
            Self::IntensitySqrt => n as f64,
            Self::PensonSolomon { p } => p.powf(2.0 * (1.0 - n as f64)),
            Self::QDeformed { q } => {
                if n == 0 {
                    return 1.0;
                }
                // invariant under q -> 1/q
                let l = q.ln().abs();
                let nf = n as f64;
                (ln_sinh(nf * l) - nf.ln() - ln_sinh(l)).exp()
            }
        }
    }
}

impl FromStr for Nonlinearity {
    type Err = NonlinearityError;

    /// Parses `unity | ps:<p> | sqrt | qdef:<q>`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        let number = |a: Option<&str>| -> Result<f64, NonlinearityError> {
            let a = a.ok_or_else(|| NonlinearityError::Parse {
                token: text.to_string(),
                reason: "missing parameter",
            })?;
            a.trim()
                .parse::<f64>()
                .map_err(|_| NonlinearityError::Parse {
                    token: a.to_string(),
                    reason: "not a decimal number",
                })
        };
        match head {
            "unity" | "sqrt" if arg.is_some() => Err(NonlinearityError::Parse {
                token: text.to_string(),
                reason: "takes no parameter",
            }),
            "unity" => Ok(Self::Unity),
            "sqrt" => Ok(Self::IntensitySqrt),
            "ps" => Self::penson_solomon(number(arg)?),
            "qdef" => Self::q_deformed(number(arg)?),
            other => Err(NonlinearityError::Parse {
                token: other.to_string(),
                reason: "expected one of unity, ps:<p>, sqrt, qdef:<q>",
            }),
        }
    }
}

impl fmt::Display for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unity => write!(f, "unity"),
            Self::PensonSolomon { p } => write!(f, "ps:{p}"),
            Self::IntensitySqrt => write!(f, "sqrt"),
            Self::QDeformed { q } => write!(f, "qdef:{q}"),
        }
    }
}

/// Serialized form: `{"name": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityDoc {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl From<&Nonlinearity> for NonlinearityDoc {
    fn from(f: &Nonlinearity) -> Self {
        Self {
            name: f.name().to_string(),
            params: f.params(),
        }
    }
}

impl TryFrom<NonlinearityDoc> for Nonlinearity {
    type Error = NonlinearityError;

    fn try_from(doc: NonlinearityDoc) -> Result<Self, Self::Error> {
        let param = |key: &'static str| {
            doc.params
                .get(key)
                .copied()
                .ok_or(NonlinearityError::Parse {
                    token: doc.name.clone(),
                    reason: "missing parameter",
                })
        };
        match doc.name.as_str() {
            "unity" => Ok(Self::Unity),
            "intensity_sqrt" => Ok(Self::IntensitySqrt),
            "penson_solomon" => Self::penson_solomon(param("p")?),
            "q_deformed" => Self::q_deformed(param("q")?),
            other => Err(NonlinearityError::Parse {
                token: other.to_string(),
                reason: "unknown nonlinearity name",
            }),
        }
    }
}

impl Serialize for Nonlinearity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NonlinearityDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Nonlinearity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = NonlinearityDoc::deserialize(d)?;
        Nonlinearity::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::Unity,
            Nonlinearity::penson_solomon(0.5).unwrap(),
            Nonlinearity::IntensitySqrt,
            Nonlinearity::q_deformed(7.0).unwrap(),
            Nonlinearity::q_deformed(0.4).unwrap(),
        ]
    }

    #[test]
    fn catalog_examples() {
        assert_eq!(Nonlinearity::Unity.eval(7), 1.0);
        let ps = Nonlinearity::penson_solomon(0.5).unwrap();
        assert!((ps.eval(3) - 4.0).abs() < 1e-14);
        let qd = Nonlinearity::q_deformed(7.0).unwrap();
        assert!((qd.eval(1) - 1.0).abs() < 1e-14);
        assert_eq!(qd.eval(0), 1.0);
        assert_eq!(Nonlinearity::IntensitySqrt.eval(4), 2.0);
        assert_eq!(Nonlinearity::IntensitySqrt.eval(0), 0.0);
    }

    #[test]
    fn q_deformed_matches_direct_formula() {
        for &q in &[7.0f64, 0.3, 1.5] {
            let f = Nonlinearity::q_deformed(q).unwrap();
            for n in 1..=20u64 {
                let nf = n as f64;
                let direct = ((q.powf(nf) - q.powf(-nf)) / (nf * (q - 1.0 / q))).sqrt();
                assert!((f.eval(n) - direct).abs() <= 1e-12 * direct, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn q_deformed_tends_to_unity() {
        let f = Nonlinearity::q_deformed(1.0 + 1e-6).unwrap();
        for n in 0..=30 {
            assert!((f.eval(n) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn penson_solomon_at_one_is_unity() {
        let f = Nonlinearity::penson_solomon(1.0).unwrap();
        for n in 0..=50 {
            assert_eq!(f.eval(n), Nonlinearity::Unity.eval(n));
        }
    }

    #[test]
    fn catalog_is_positive_and_finite() {
        for f in catalog() {
            for n in 1..=200 {
                let v = f.eval(n);
                assert!(v > 0.0 && v.is_finite(), "{f} at {n}: {v}");
            }
        }
    }

    #[test]
    fn parses_grammar() {
        assert_eq!(
            "ps:0.5".parse::<Nonlinearity>().unwrap(),
            Nonlinearity::PensonSolomon { p: 0.5 }
        );
        assert_eq!(
            "unity".parse::<Nonlinearity>().unwrap(),
            Nonlinearity::Unity
        );
        assert_eq!(
            "qdef:7".parse::<Nonlinearity>().unwrap(),
            Nonlinearity::QDeformed { q: 7.0 }
        );
        assert_eq!(
            "sqrt".parse::<Nonlinearity>().unwrap(),
            Nonlinearity::IntensitySqrt
        );
    }

    #[test]
    fn parse_errors_name_the_token() {
        match "cosh:2".parse::<Nonlinearity>() {
            Err(NonlinearityError::Parse { token, .. }) => assert_eq!(token, "cosh"),
            other => panic!("unexpected {other:?}"),
        }
        match "ps:abc".parse::<Nonlinearity>() {
            Err(NonlinearityError::Parse { token, .. }) => assert_eq!(token, "abc"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            "ps".parse::<Nonlinearity>(),
            Err(NonlinearityError::Parse { .. })
        ));
        assert!(matches!(
            "unity:3".parse::<Nonlinearity>(),
            Err(NonlinearityError::Parse { .. })
        ));
    }

    #[test]
    fn range_errors() {
        for text in ["ps:1.5", "ps:0", "ps:-0.2", "qdef:1", "qdef:0", "qdef:-3"] {
            assert!(
                matches!(
                    text.parse::<Nonlinearity>(),
                    Err(NonlinearityError::Range { .. })
                ),
                "{text}"
            );
        }
    }

    #[test]
    fn display_round_trips() {
        for f in catalog() {
            assert_eq!(f.to_string().parse::<Nonlinearity>().unwrap(), f);
        }
    }

    #[test]
    fn document_round_trips() {
        for f in catalog() {
            let doc = NonlinearityDoc::from(&f);
            assert_eq!(Nonlinearity::try_from(doc).unwrap(), f);
        }
    }
}
