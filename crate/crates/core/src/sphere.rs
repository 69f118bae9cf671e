//! Points of the Riemann sphere, the chordal metric, branch-indexed logarithms
//! and the Möbius maps `M_α(z) = α z / ((α − 1/α) z + 1/α)`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moduli above this are identified with the point at infinity.
pub const INFINITY_MODULUS: f64 = 1e15;

/// A point of `Ĉ = ℂ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

pub use ExtendedComplex::{Finite, Infinity};

impl ExtendedComplex {
    /// Wraps `z`, sending non-finite values to `∞`.
    pub fn new(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Finite(z)
        } else {
            Infinity
        }
    }

    pub fn real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Finite(z) => Some(z),
            Infinity => None,
        }
    }

    /// Same point with huge moduli collapsed onto `∞`.
    pub fn normalized(self) -> Self {
        match self {
            Finite(z) if z.norm() > INFINITY_MODULUS => Infinity,
            other => other,
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        Self::new(z)
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedComplex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Finite(z) => {
                let mut t = serializer.serialize_tuple(2)?;
                t.serialize_element(&z.re)?;
                t.serialize_element(&z.im)?;
                t.end()
            }
            Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedComplex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PointVisitor;

        impl<'de> Visitor<'de> for PointVisitor {
            type Value = ExtendedComplex;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a [re, im] pair or the string \"inf\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                if v == "inf" {
                    Ok(Infinity)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: de::SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let re: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                if !(re.is_finite() && im.is_finite()) {
                    return Err(de::Error::custom("finite points need finite parts"));
                }
                Ok(Finite(Complex64::new(re, im)))
            }
        }

        deserializer.deserialize_any(PointVisitor)
    }
}

/// Chordal distance `|z − w| / (√(1+|z|²) √(1+|w|²))`, extended continuously by
/// `d(z, ∞) = 1 / √(1+|z|²)`.
pub fn spherical_distance(z: ExtendedComplex, w: ExtendedComplex) -> f64 {
    match (z.normalized(), w.normalized()) {
        (Infinity, Infinity) => 0.0,
        (Finite(a), Infinity) | (Infinity, Finite(a)) => 1.0 / a.norm().hypot(1.0),
        (Finite(a), Finite(b)) => {
            let d = (a - b).norm();
            if d == 0.0 {
                return 0.0;
            }
            (d / (a.norm().hypot(1.0) * b.norm().hypot(1.0))).min(1.0)
        }
    }
}

/// Argument in `[0, 2π)`.
pub fn arg_0_2pi(w: Complex64) -> f64 {
    let mut a = w.im.atan2(w.re);
    if a < 0.0 {
        a += TAU;
    }
    if a >= TAU {
        a -= TAU;
    }
    a
}

/// `log|w| + i(arg w + 2πm)` with `arg w ∈ [0, 2π)`.
pub fn branch_log(w: Complex64, m: i64) -> Result<Complex64> {
    if !(w.re.is_finite() && w.im.is_finite()) || w.norm() > INFINITY_MODULUS {
        return Err(Error::LogDomain("infinity".into()));
    }
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::LogDomain("zero".into()));
    }
    Ok(Complex64::new(w.norm().ln(), arg_0_2pi(w) + TAU * m as f64))
}

/// Principal logarithm with `arg ∈ (−π, π]`, used for continuity tracking.
pub(crate) fn principal_log(w: Complex64) -> Complex64 {
    Complex64::new(w.norm().ln(), w.im.atan2(w.re))
}

fn check_alpha(alpha: Complex64) -> Result<Complex64> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) || alpha.norm() > INFINITY_MODULUS {
        return Err(Error::MobiusCoefficient("alpha is infinite".into()));
    }
    if alpha.norm() == 0.0 {
        return Err(Error::MobiusCoefficient("alpha is zero".into()));
    }
    Ok(alpha * alpha)
}

/// `M_α(z) = α² z / ((α² − 1) z + 1)`.
pub fn mobius_apply(alpha: Complex64, z: ExtendedComplex) -> Result<ExtendedComplex> {
    let s = check_alpha(alpha)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(match z.normalized() {
        Infinity => {
            if s == one {
                Infinity
            } else {
                ExtendedComplex::new(s / (s - one))
            }
        }
        Finite(z) => {
            let den = (s - one) * z + one;
            if den.norm() <= 4.0 * f64::EPSILON * ((s - one).norm() * z.norm() + 1.0) {
                Infinity
            } else {
                ExtendedComplex::new(s * z / den)
            }
        }
    })
}

/// `M_α⁻¹(w) = w / (α² − (α² − 1) w)`.
pub fn mobius_invert(alpha: Complex64, w: ExtendedComplex) -> Result<ExtendedComplex> {
    let s = check_alpha(alpha)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(match w.normalized() {
        Infinity => {
            if s == one {
                Infinity
            } else {
                ExtendedComplex::new(one / (one - s))
            }
        }
        Finite(w) => {
            let den = s - (s - one) * w;
            if den.norm() <= 4.0 * f64::EPSILON * (s.norm() + (s - one).norm() * w.norm()) {
                Infinity
            } else {
                ExtendedComplex::new(w / den)
            }
        }
    })
}
