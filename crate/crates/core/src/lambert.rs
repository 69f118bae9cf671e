//! Complex Lambert W on all branches.
//!
//! Branches follow the usual convention, which is equivalent to labelling a
//! root `v` of `v e^v = x` by the integer `k` with `v + Log v = Log x + 2πik`.

use std::f64::consts::{E, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The branch index of a root `v` of `v e^v = x`.
pub fn branch_label(v: Complex64, x: Complex64) -> i64 {
    ((v.im + v.arg() - x.arg()) / TAU).round() as i64
}

fn halley(x: Complex64, mut v: Complex64) -> Option<Complex64> {
    for _ in 0..40 {
        let ev = v.exp();
        let f = v * ev - x;
        let v1 = v + 1.0;
        if v1.norm() < 1e-300 {
            return None;
        }
        let den = ev * v1 - (v + 2.0) * f / (v1 * 2.0);
        if den.norm() == 0.0 || !den.norm().is_finite() {
            return None;
        }
        let step = f / den;
        v -= step;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * v.norm().max(1e-300) {
            break;
        }
    }
    let res = (v * v.exp() - x).norm();
    (res <= 1e-10 * x.norm().max(1e-300)).then_some(v)
}

/// `W_k(x)`.
pub fn lambert_w(x: Complex64, k: i64) -> Result<Complex64> {
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Other(format!("lambert_w of non-finite {x}")));
    }
    if x.norm() == 0.0 {
        return if k == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::LogDomain(format!("W_{k}(0) is not finite")))
        };
    }
    let y = x.ln() + Complex64::new(0.0, TAU * k as f64);
    let mut guesses = Vec::with_capacity(4);
    if y.norm() > 1.0 {
        let l2 = y.ln();
        guesses.push(y - l2 + l2 / y);
    }
    // expansion about the branch point −1/e
    let p = ((x * E + 1.0) * 2.0).sqrt();
    for s in [1.0, -1.0] {
        guesses.push(-1.0 + p * s - p * p / 3.0 + p * p * p * (s * 11.0 / 72.0));
    }
    if k == 0 {
        guesses.push((x + 1.0).ln());
    }
    guesses.push(y - y.ln());
    for g in guesses {
        if !(g.re.is_finite() && g.im.is_finite()) {
            continue;
        }
        if let Some(v) = halley(x, g) {
            if branch_label(v, x) == k {
                return Ok(v);
            }
        }
    }
    Err(Error::NoConvergence(format!("lambert W branch {k} at {x}")))
}
