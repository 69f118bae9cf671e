//! The three normalized holomorphic families:
//!
//! * `exp`: `E(z) = e^{λz}`, normalized by `E(0) = 1`;
//! * `pexp`: `E(z) = α z^p e^{λz}` with `α = (−λ/p)^p e^p`, so the free critical
//!   point `c = −p/λ` maps to `1`;
//! * `av2`: `g(z) = M_α(e^{βz})`, two omitted asymptotic values `0` and
//!   `α²/(α² − 1)`, normalized by `g(0) = 1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::{solve_scalar, NewtonSettings};
use crate::sphere::{
    branch_log, mobius_invert, principal_log, ExtendedComplex, Finite, Infinity, INFINITY_MODULUS,
};

/// Which family a map belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilySpec {
    Exp,
    Pexp { p: u32 },
    Av2,
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Pexp { p } if *p == 0 => {
                Err(Error::InvalidParams("pexp requires p >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Exp => "exp",
            FamilySpec::Pexp { .. } => "pexp",
            FamilySpec::Av2 => "av2",
        }
    }
}

/// A concrete member of one of the families. PEXP stores only `λ`; `α` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyParams {
    Exp { lambda: Complex64 },
    Pexp { p: u32, lambda: Complex64 },
    Av2 { alpha: Complex64, beta: Complex64 },
}

/// Asymptotic values, critical points (with multiplicity) and critical values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoints {
    pub asymptotic_values: Vec<ExtendedComplex>,
    pub critical_points: Vec<(Complex64, u32)>,
    pub critical_values: Vec<ExtendedComplex>,
}

fn finite_nonzero(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite() && z.norm() > 0.0 && z.norm() <= INFINITY_MODULUS
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `log α = p·log(−λ/p) + p` on the `[0, 2π)` sheet.
pub fn pexp_log_alpha(p: u32, lambda: Complex64) -> Result<Complex64> {
    let pf = p as f64;
    Ok(branch_log(-lambda / pf, 0)? * pf + pf)
}

/// Second asymptotic value `α²/(α² − 1)` of `g_{α,β}`.
pub fn av2_second_value(alpha: Complex64) -> ExtendedComplex {
    let s = alpha * alpha;
    if (s - ONE).norm() == 0.0 {
        Infinity
    } else {
        ExtendedComplex::new(s / (s - ONE))
    }
}

impl FamilyParams {
    pub fn spec(&self) -> FamilySpec {
        match *self {
            FamilyParams::Exp { .. } => FamilySpec::Exp,
            FamilyParams::Pexp { p, .. } => FamilySpec::Pexp { p },
            FamilyParams::Av2 { .. } => FamilySpec::Av2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilyParams::Exp { lambda } => {
                if !finite_nonzero(lambda) {
                    return Err(Error::InvalidParams(
                        "lambda must be finite and nonzero".into(),
                    ));
                }
            }
            FamilyParams::Pexp { p, lambda } => {
                if p == 0 {
                    return Err(Error::InvalidParams("pexp requires p >= 1".into()));
                }
                if !finite_nonzero(lambda) {
                    return Err(Error::InvalidParams(
                        "lambda must be finite and nonzero".into(),
                    ));
                }
            }
            FamilyParams::Av2 { alpha, beta } => {
                if !finite_nonzero(alpha) {
                    return Err(Error::InvalidParams(
                        "alpha must be finite and nonzero".into(),
                    ));
                }
                if !finite_nonzero(beta) {
                    return Err(Error::InvalidParams(
                        "beta must be finite and nonzero".into(),
                    ));
                }
                if (alpha * alpha - ONE).norm() < 1e-14 {
                    return Err(Error::InvalidParams(
                        "alpha^2 = 1 sends the second asymptotic value to infinity".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Modulus of the parameter the compactness estimates bound: `|λ|` or `|β|`.
    pub fn modulus(&self) -> f64 {
        match *self {
            FamilyParams::Exp { lambda } | FamilyParams::Pexp { lambda, .. } => lambda.norm(),
            FamilyParams::Av2 { beta, .. } => beta.norm(),
        }
    }

    /// `λ` for the entire families, `β` for AV2.
    pub fn rate(&self) -> Complex64 {
        match *self {
            FamilyParams::Exp { lambda } | FamilyParams::Pexp { lambda, .. } => lambda,
            FamilyParams::Av2 { beta, .. } => beta,
        }
    }

    /// Derived PEXP coefficient `α = (−λ/p)^p e^p`.
    pub fn pexp_alpha(&self) -> Option<Complex64> {
        match *self {
            FamilyParams::Pexp { p, lambda } => pexp_log_alpha(p, lambda).ok().map(|l| l.exp()),
            _ => None,
        }
    }

    /// Critical point `−p/λ` of a PEXP map.
    pub fn critical_point(&self) -> Option<Complex64> {
        match *self {
            FamilyParams::Pexp { p, lambda } => Some(-(p as f64) / lambda),
            _ => None,
        }
    }

    pub fn evaluate(&self, z: ExtendedComplex) -> Result<ExtendedComplex> {
        match z.normalized() {
            Infinity => Err(Error::EssentialSingularity),
            Finite(z) => Ok(self.eval(z)),
        }
    }

    /// Evaluation at a finite point.
    pub fn eval(&self, z: Complex64) -> ExtendedComplex {
        match *self {
            FamilyParams::Exp { lambda } => exp_ext(lambda * z),
            FamilyParams::Pexp { p, lambda } => {
                if z.norm() == 0.0 {
                    return Finite(Complex64::new(0.0, 0.0));
                }
                let pf = p as f64;
                // (−λz/p)^p e^{p + λz}; any branch of the log works since p is an integer
                exp_ext(principal_log(-lambda * z / pf) * pf + pf + lambda * z)
            }
            FamilyParams::Av2 { alpha, beta } => {
                let s = alpha * alpha;
                let e = beta * z;
                if e.re > 700.0 {
                    return av2_second_value(alpha);
                }
                let u = e.exp();
                let den = (s - ONE) * u + ONE;
                if den.norm() == 0.0 {
                    Infinity
                } else {
                    ExtendedComplex::new(s * u / den)
                }
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::EssentialSingularity);
        }
        Ok(match *self {
            FamilyParams::Exp { lambda } => lambda * (lambda * z).exp(),
            FamilyParams::Pexp { p, lambda } => {
                let alpha = self.pexp_alpha().unwrap_or(Complex64::new(f64::NAN, 0.0));
                let pf = p as f64;
                // α z^{p−1} e^{λz} (p + λz), valid at z = 0 too
                alpha * z.powu(p - 1) * (lambda * z).exp() * (lambda * z + pf)
            }
            FamilyParams::Av2 { alpha, beta } => {
                let s = alpha * alpha;
                let e = beta * z;
                if e.re > 700.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let u = e.exp();
                let d = (s - ONE) * u + ONE;
                if u.norm() > 1.0 {
                    s * beta / (d * ((s - ONE) + ONE / u))
                } else {
                    s * beta * u / (d * d)
                }
            }
        })
    }

    pub fn singular_points(&self) -> SingularPoints {
        match *self {
            FamilyParams::Exp { .. } => SingularPoints {
                asymptotic_values: vec![ExtendedComplex::real(0.0), Infinity],
                critical_points: vec![],
                critical_values: vec![],
            },
            FamilyParams::Pexp { p, lambda } => {
                let mut critical_points = Vec::new();
                let mut critical_values = Vec::new();
                if p >= 2 {
                    critical_points.push((Complex64::new(0.0, 0.0), p - 1));
                    critical_values.push(ExtendedComplex::real(0.0));
                }
                critical_points.push((-(p as f64) / lambda, 1));
                critical_values.push(ExtendedComplex::real(1.0));
                SingularPoints {
                    asymptotic_values: vec![ExtendedComplex::real(0.0), Infinity],
                    critical_points,
                    critical_values,
                }
            }
            FamilyParams::Av2 { alpha, .. } => SingularPoints {
                asymptotic_values: vec![ExtendedComplex::real(0.0), av2_second_value(alpha)],
                critical_points: vec![],
                critical_values: vec![],
            },
        }
    }

    /// Preimage of `w` on the sheet labelled `m`.
    ///
    /// EXP and AV2 are closed form. PEXP runs damped Newton on
    /// `p·log z + λz + log α − log_m(w)` with the logarithm of `z` continued
    /// along the Newton path from the seed's `[0, 2π)` sheet.
    pub fn inverse_branch(
        &self,
        w: Complex64,
        m: i64,
        seed: Complex64,
        settings: &NewtonSettings,
    ) -> Result<Complex64> {
        match *self {
            FamilyParams::Exp { lambda } => {
                if w.norm() == 0.0 {
                    return Err(Error::OmittedValue("0".into()));
                }
                Ok(branch_log(w, m)? / lambda)
            }
            FamilyParams::Av2 { alpha, beta } => {
                let u = match mobius_invert(alpha, Finite(w))?.normalized() {
                    Infinity => return Err(Error::OmittedValue(format!("{w}"))),
                    Finite(u) => u,
                };
                if u.norm() == 0.0 {
                    return Err(Error::OmittedValue("0".into()));
                }
                Ok(branch_log(u, m)? / beta)
            }
            FamilyParams::Pexp { p, lambda } => {
                if w.norm() == 0.0 {
                    return Err(Error::OmittedValue("0 (asymptotic value)".into()));
                }
                if seed.norm() == 0.0 || !seed.re.is_finite() || !seed.im.is_finite() {
                    return Err(Error::MissingSeed("pexp inverse needs a nonzero seed"));
                }
                let pf = p as f64;
                let target = branch_log(w, m)? - pexp_log_alpha(p, lambda)?;
                let seed_log = branch_log(seed, 0)?;
                let eval = |z: Complex64, ell: Complex64| {
                    if z.norm() == 0.0 {
                        return None;
                    }
                    Some((ell * pf + lambda * z - target, pf / z + lambda))
                };
                let advance =
                    |ell: Complex64, a: Complex64, b: Complex64| ell + principal_log(b / a);
                let starts = std::iter::once(seed).chain((0..settings.restarts).map(|k| {
                    seed + Complex64::from_polar(
                        settings.restart_radius,
                        TAU * k as f64 / settings.restarts as f64,
                    )
                }));
                for start in starts {
                    if start.norm() == 0.0 {
                        continue;
                    }
                    let ell0 = seed_log + principal_log(start / seed);
                    if let Some(root) = solve_scalar(start, ell0, settings, eval, advance) {
                        if let Finite(v) = self.eval(root) {
                            if (v - w).norm() <= 1e-11 * w.norm().max(1.0) {
                                return Ok(root);
                            }
                        }
                    }
                }
                Err(Error::NoConvergence(format!(
                    "pexp preimage of {w} on sheet {m} from seed {seed}"
                )))
            }
        }
    }
}

fn exp_ext(e: Complex64) -> ExtendedComplex {
    if e.re > 709.0 {
        Infinity
    } else {
        ExtendedComplex::new(e.exp())
    }
}

/// Solves for the parameters that send the normalization point `1` to `target`
/// on sheet `branch`.
///
/// * EXP: `λ = log_m(target)`.
/// * PEXP: Newton on `p·log(−λ/p) + p + λ = log_m(target)` from the seed's `λ`.
/// * AV2: `α² = aux/(aux − 1)` from the marked second asymptotic value `aux`,
///   then `β = log_m(M_α⁻¹(target))`. The square root is the principal one
///   unless a seed is given, in which case the root nearer the seed's `α`.
pub fn solve_parameter(
    spec: FamilySpec,
    target: Complex64,
    branch: i64,
    aux: Option<ExtendedComplex>,
    seed: Option<&FamilyParams>,
    settings: &NewtonSettings,
) -> Result<FamilyParams> {
    spec.validate()?;
    if !finite_nonzero(target) {
        return Err(Error::OmittedValue(format!("{target}")));
    }
    let params = match spec {
        FamilySpec::Exp => FamilyParams::Exp {
            lambda: branch_log(target, branch)?,
        },
        FamilySpec::Pexp { p } => {
            let seed_lambda = match seed {
                Some(FamilyParams::Pexp { lambda, .. }) => *lambda,
                _ => {
                    return Err(Error::MissingSeed(
                        "pexp parameter solve needs a seed lambda",
                    ))
                }
            };
            let pf = p as f64;
            let rhs = branch_log(target, branch)?;
            let eval = |lambda: Complex64, ell: Complex64| {
                if lambda.norm() == 0.0 {
                    return None;
                }
                Some((ell * pf + pf + lambda - rhs, pf / lambda + ONE))
            };
            let advance = |ell: Complex64, a: Complex64, b: Complex64| ell + principal_log(b / a);
            let seed_log = branch_log(-seed_lambda / pf, 0)?;
            let starts = std::iter::once(seed_lambda).chain((0..settings.restarts).map(|k| {
                seed_lambda
                    + Complex64::from_polar(
                        settings.restart_radius,
                        TAU * k as f64 / settings.restarts as f64,
                    )
            }));
            let mut found = None;
            for start in starts {
                if start.norm() == 0.0 {
                    continue;
                }
                let ell0 = seed_log + principal_log(start / seed_lambda);
                if let Some(root) = solve_scalar(start, ell0, settings, eval, advance) {
                    found = Some(root);
                    break;
                }
            }
            let lambda = found.ok_or_else(|| {
                Error::NoConvergence(format!(
                    "pexp parameter for target {target} on sheet {branch}"
                ))
            })?;
            FamilyParams::Pexp { p, lambda }
        }
        FamilySpec::Av2 => {
            let aux = match aux.map(ExtendedComplex::normalized) {
                Some(Finite(a)) => a,
                _ => {
                    return Err(Error::InvalidParams(
                        "av2 needs a finite second asymptotic value".into(),
                    ))
                }
            };
            if aux.norm() == 0.0 || (aux - ONE).norm() == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "second asymptotic value {aux} must avoid 0, 1 and infinity"
                )));
            }
            let s = aux / (aux - ONE);
            let mut alpha = s.sqrt();
            if let Some(FamilyParams::Av2 { alpha: prev, .. }) = seed {
                if (-alpha - prev).norm() < (alpha - prev).norm() {
                    alpha = -alpha;
                }
            }
            let u = match mobius_invert(alpha, Finite(target))?.normalized() {
                Finite(u) if u.norm() > 0.0 => u,
                _ => return Err(Error::OmittedValue(format!("{target}"))),
            };
            FamilyParams::Av2 {
                alpha,
                beta: branch_log(u, branch)?,
            }
        }
    };
    params.validate()?;
    Ok(params)
}
