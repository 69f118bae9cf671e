//! Integrable quadratic differentials with simple poles and the transfer
//! operator `E_*`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{pexp_log_alpha, FamilyParams};
use crate::lambert::lambert_w;
use crate::quadrature::{plane_integral, Estimate, QuadSettings};
use crate::sphere::{ExtendedComplex, Finite};

/// `φ(z) = Σ a_j / (z − p_j)`, with at most a simple pole at `∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDifferential {
    pub poles: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
}

/// `r³ max_θ |φ(r e^{iθ})|` at two radii; bounded for an integrable differential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub c_100: f64,
    pub c_1000: f64,
    pub ok: bool,
}

impl QuadraticDifferential {
    pub fn new(poles: Vec<Complex64>, coeffs: Vec<Complex64>) -> Result<Self> {
        let q = Self { poles, coeffs };
        q.validate()?;
        Ok(q)
    }

    pub fn zero(poles: Vec<Complex64>) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); poles.len()];
        Self { poles, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|a| a.norm() == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDifferential(m));
        if self.poles.len() != self.coeffs.len() {
            return bad(format!(
                "{} poles but {} coefficients",
                self.poles.len(),
                self.coeffs.len()
            ));
        }
        if self.poles.len() < 3 {
            return bad("need at least 3 finite poles".into());
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !self.poles.iter().chain(&self.coeffs).all(finite) {
            return bad("poles and coefficients must be finite".into());
        }
        let scale = self.poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
        for i in 0..self.poles.len() {
            for k in i + 1..self.poles.len() {
                if (self.poles[i] - self.poles[k]).norm() <= 1e-12 * scale {
                    return bad(format!("poles {i} and {k} coincide"));
                }
            }
        }
        let mass: f64 = self.coeffs.iter().map(|a| a.norm()).sum();
        let s0: Complex64 = self.coeffs.iter().sum();
        let s1: Complex64 = self
            .coeffs
            .iter()
            .zip(&self.poles)
            .map(|(a, p)| a * p)
            .sum();
        if s0.norm() > 1e-10 * mass {
            return bad(format!("coefficients sum to {s0}, need 0"));
        }
        if s1.norm() > 1e-10 * mass * scale {
            return bad(format!("first moment is {s1}, need 0"));
        }
        let decay = self.decay_check();
        if !decay.ok {
            return bad(format!("no cubic decay at infinity ({decay:?})"));
        }
        Ok(())
    }

    /// Largest pole modulus.
    pub fn radius(&self) -> f64 {
        self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Partial-fraction sum without using the moment conditions.
    fn eval_direct(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.poles)
            .map(|(a, p)| a / (z - p))
            .sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if z.norm() > 2.0 * self.radius() {
            // 1/(z − p) − 1/z − p/z² = p²/(z²(z − p)); the two moments vanish
            let s: Complex64 = self
                .coeffs
                .iter()
                .zip(&self.poles)
                .map(|(a, p)| a * p * p / (z - p))
                .sum();
            s / (z * z)
        } else {
            self.eval_direct(z)
        }
    }

    pub fn decay_check(&self) -> DecayReport {
        let c = |r: f64| {
            (0..32)
                .map(|k| {
                    let z = Complex64::from_polar(
                        r * self.radius().max(1.0),
                        TAU * (k as f64 + 0.5) / 32.0,
                    );
                    z.norm().powi(3) * self.eval_direct(z).norm()
                })
                .fold(0.0, f64::max)
        };
        let (c_100, c_1000) = (c(100.0), c(1000.0));
        DecayReport {
            c_100,
            c_1000,
            ok: c_1000 <= 2.0 * c_100 + f64::MIN_POSITIVE,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            poles: self.poles.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Sum of two differentials; shared poles are merged.
    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, a) in other.poles.iter().zip(&other.coeffs) {
            match out.poles.iter().position(|q| q == p) {
                Some(i) => out.coeffs[i] += a,
                None => {
                    out.poles.push(*p);
                    out.coeffs.push(*a);
                }
            }
        }
        out
    }
}

/// Basis of the differentials with simple poles on `points ∪ {∞}`.
///
/// Element `j − 2` is `K_j / ((z − p₀)(z − p₁)(z − p_j))` with residue 1 at `p_j`.
pub fn canonical_basis(points: &[Complex64]) -> Result<Vec<QuadraticDifferential>> {
    if points.len() < 3 {
        return Ok(Vec::new());
    }
    let (p0, p1) = (points[0], points[1]);
    let mut out = Vec::with_capacity(points.len() - 2);
    for &pj in &points[2..] {
        let d = p1 - p0;
        let coeffs = vec![(pj - p1) / d, (p0 - pj) / d, Complex64::new(1.0, 0.0)];
        out.push(QuadraticDifferential::new(vec![p0, p1, pj], coeffs)?);
    }
    Ok(out)
}

/// `‖q‖ = ∫ |φ| dA`.
pub fn qd_norm(q: &QuadraticDifferential, settings: &QuadSettings) -> Result<Estimate> {
    q.validate()?;
    if q.is_zero() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let f = |z: Complex64| Ok([q.eval(z).norm()]);
    let [e] = plane_integral(&f, &q.poles, settings)?;
    Ok(e)
}

/// A truncated preimage sum and an estimate of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushForward {
    pub value: Complex64,
    pub tail: f64,
}

fn finite_point(z: ExtendedComplex) -> Option<Complex64> {
    match z.normalized() {
        Finite(w) => Some(w),
        _ => None,
    }
}

/// Calls `visit(m, w, E'(w))` for every preimage `w` of `z` with branch index `|m| ≤ m_max`.
fn for_each_preimage(
    params: &FamilyParams,
    z: Complex64,
    m_max: i64,
    mut visit: impl FnMut(i64, Complex64, Complex64),
) -> Result<()> {
    let i2pi = Complex64::new(0.0, TAU);
    if z.norm() == 0.0 {
        return Err(Error::OmittedValue(z.to_string()));
    }
    match *params {
        FamilyParams::Exp { lambda } => {
            let ell = z.ln();
            for m in -m_max..=m_max {
                visit(m, (ell + i2pi * m as f64) / lambda, lambda * z);
            }
        }
        FamilyParams::Av2 { alpha, beta } => {
            let s = alpha * alpha;
            let den = s - (s - 1.0) * z;
            if den.norm() == 0.0 {
                return Err(Error::OmittedValue(z.to_string()));
            }
            let ell = (z / den).ln();
            // g'(w) = β z (α² − (α² − 1) z) / α² at every preimage of z
            let d = beta * z * den / s;
            for m in -m_max..=m_max {
                visit(m, (ell + i2pi * m as f64) / beta, d);
            }
        }
        FamilyParams::Pexp { p, lambda } => {
            let pf = p as f64;
            let ell = (z.ln() - pexp_log_alpha(p, lambda)?) / pf;
            for r in 0..p {
                // w e^{λw/p} = (z/α)^{1/p} ζ_r, i.e. λw/p = W_m(λ/p · root)
                let x = lambda / pf * (ell + i2pi * (r as f64 / pf)).exp();
                for m in -m_max..=m_max {
                    let v = lambert_w(x, m).map_err(|e| {
                        Error::Other(format!("preimage sheet ({r}, {m}) of {z}: {e}"))
                    })?;
                    let w = v * pf / lambda;
                    let c = pf + lambda * w;
                    if c.norm() == 0.0 {
                        return Err(Error::Other(format!("{z} is the critical value")));
                    }
                    // E'(w) = z (p + λw) / w
                    visit(m, w, z * c / w);
                }
            }
        }
    }
    Ok(())
}

/// Sums of `φ̃(w)/E'(w)²` over preimages with `|m| ≤ m_max` and over `m_max < |m| ≤ 2 m_max`,
/// plus the magnitude of the outermost included terms.
fn preimage_sums(
    q: &QuadraticDifferential,
    params: &FamilyParams,
    z: Complex64,
    m_max: usize,
) -> Result<(Complex64, Complex64, f64)> {
    let m_max = m_max as i64;
    let zero = Complex64::new(0.0, 0.0);
    let (mut inner, mut outer, mut edge) = (zero, zero, 0.0);
    for_each_preimage(params, z, 2 * m_max, |m, w, d| {
        let term = q.eval(w) / (d * d);
        if m.abs() <= m_max {
            inner += term;
            if m.abs() == m_max {
                edge += term.norm();
            }
        } else {
            outer += term;
        }
    })?;
    Ok((inner, outer, edge))
}

/// `(E_* q̃)(z) = Σ_{E(w) = z} φ̃(w) / E'(w)²` truncated to branch indices `|m| ≤ m_max`.
pub fn push_forward_at(
    q: &QuadraticDifferential,
    params: &FamilyParams,
    z: Complex64,
    m_max: usize,
) -> Result<PushForward> {
    if m_max == 0 {
        return Err(Error::Other("truncation must be at least 1".into()));
    }
    params.validate()?;
    let (value, _, edge) = preimage_sums(q, params, z, m_max)?;
    // terms decay like |m|⁻³, so the tail is about m_max/2 times the edge terms
    Ok(PushForward {
        value,
        tail: 0.5 * m_max as f64 * edge,
    })
}

/// Points where `E_* q̃` can be singular: images of the poles and the singular values.
pub fn push_forward_singularities(
    q: &QuadraticDifferential,
    params: &FamilyParams,
) -> Vec<Complex64> {
    let sp = params.singular_points();
    q.poles
        .iter()
        .filter_map(|&p| finite_point(params.eval(p)))
        .chain(sp.asymptotic_values.into_iter().filter_map(finite_point))
        .chain(sp.critical_values.into_iter().filter_map(finite_point))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionSettings {
    pub truncation: usize,
    pub quad: QuadSettings,
}

impl Default for ContractionSettings {
    fn default() -> Self {
        Self {
            truncation: 64,
            quad: QuadSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub truncation: usize,
    pub norm: Estimate,
    /// `‖E_* q̃‖` at truncation `M`.
    pub push_norm: Estimate,
    /// `‖E_* q̃‖` at truncation `2M`.
    pub push_norm_refined: Estimate,
    pub ratio: f64,
    pub ratio_refined: f64,
    pub truncation_discrepancy: f64,
    /// Quadrature errors of both norms plus the truncation discrepancy.
    pub error: f64,
    /// `1 − ratio − error`; positive means strict contraction is established.
    pub margin: f64,
    pub conclusive: bool,
}

/// `‖E_* q̃‖ / ‖q̃‖`.
pub fn contraction_ratio(
    q: &QuadraticDifferential,
    params: &FamilyParams,
    settings: &ContractionSettings,
) -> Result<ContractionReport> {
    q.validate()?;
    params.validate()?;
    if q.is_zero() {
        return Err(Error::InvalidDifferential(
            "the zero differential has no contraction ratio".into(),
        ));
    }
    if settings.truncation == 0 {
        return Err(Error::Other("truncation must be at least 1".into()));
    }
    let norm = qd_norm(q, &settings.quad)?;
    let m = settings.truncation;
    let f = |z: Complex64| {
        let (inner, outer, _) = preimage_sums(q, params, z, m)?;
        Ok([inner.norm(), (inner + outer).norm()])
    };
    let quad = QuadSettings {
        abs_tol: settings
            .quad
            .abs_tol
            .max(settings.quad.rel_tol * norm.value),
        ..settings.quad
    };
    let [push_norm, push_norm_refined] =
        plane_integral(&f, &push_forward_singularities(q, params), &quad)?;
    let ratio = push_norm.value / norm.value;
    let ratio_refined = push_norm_refined.value / norm.value;
    let truncation_discrepancy = (ratio - ratio_refined).abs();
    let error = (push_norm.error + ratio * norm.error) / norm.value + truncation_discrepancy;
    let margin = 1.0 - ratio - error;
    Ok(ContractionReport {
        truncation: m,
        norm,
        push_norm,
        push_norm_refined,
        ratio,
        ratio_refined,
        truncation_discrepancy,
        error,
        margin,
        conclusive: margin > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cubic() -> QuadraticDifferential {
        // 2/(z³ − z)
        QuadraticDifferential::new(
            vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(-2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap()
    }

    /// Closed form of the EXP push-forward: Σ_m 1/(A + 2πim) = coth(A/2)/2.
    fn exp_push_exact(q: &QuadraticDifferential, lambda: Complex64, z: Complex64) -> Complex64 {
        let s: Complex64 = q
            .coeffs
            .iter()
            .zip(&q.poles)
            .map(|(a, p)| {
                let e = (lambda * p).exp();
                a * (z + e) / (z - e)
            })
            .sum();
        s / (lambda * z * z * 2.0)
    }

    #[test]
    fn validation() {
        assert!(cubic().validate().is_ok());
        let q = QuadraticDifferential {
            coeffs: vec![c(1.0, 0.0); 3],
            ..cubic()
        };
        assert!(matches!(q.validate(), Err(Error::InvalidDifferential(_))));
        let q = QuadraticDifferential {
            coeffs: vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            ..cubic()
        };
        assert!(q.validate().is_err());
        assert!(QuadraticDifferential::new(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(-1.0, 0.0)]
        )
        .is_err());
        assert!(QuadraticDifferential::zero(cubic().poles)
            .validate()
            .is_ok());
        let d = cubic().decay_check();
        assert!(d.ok && d.c_1000 > 0.0);
    }

    #[test]
    fn serde_shape() {
        let v = serde_json::to_value(cubic()).unwrap();
        assert_eq!(v["poles"][1], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["coeffs"][0], serde_json::json!([-2.0, 0.0]));
    }

    #[test]
    fn canonical_basis_matches_cubic() {
        let b = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(b.len(), 1);
        for z in [c(0.3, 0.7), c(-2.0, 5.0), c(40.0, -3.0)] {
            assert!((b[0].eval(z) - cubic().eval(z)).norm() < 1e-14 * cubic().eval(z).norm());
        }
        assert!(canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap()
            .is_empty());
        assert_eq!(
            canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 3.0)])
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn stable_far_evaluation() {
        let q = cubic();
        for z in [c(3.0, 4.0), c(1e3, 1.0), c(-50.0, 80.0)] {
            let exact = 2.0 / (z * z * z - z);
            assert!((q.eval(z) - exact).norm() < 1e-13 * exact.norm());
        }
    }

    #[test]
    fn norm_of_cubic() {
        // independent QUADPACK value in polar coordinates
        let e = qd_norm(&cubic(), &QuadSettings::default()).unwrap();
        let reference = 27.500_743_272_081_486;
        assert!((e.value - reference).abs() < 1e-3 * reference, "{e:?}");
        assert!(e.error < 1e-4 * reference);
        assert!((e.value - reference).abs() <= e.error.max(1e-5 * reference));
    }

    #[test]
    fn norm_is_homogeneous() {
        let s = QuadSettings::default();
        let base = qd_norm(&cubic(), &s).unwrap().value;
        let scaled = qd_norm(&cubic().scaled(c(-3.0, 4.0)), &s).unwrap().value;
        assert!((scaled - 5.0 * base).abs() < 1e-10 * scaled);
        assert_eq!(
            qd_norm(&QuadraticDifferential::zero(cubic().poles), &s)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn exp_push_forward_truncations() {
        let params = FamilyParams::Exp {
            lambda: c(1.0, 0.0),
        };
        // z = e itself is the image of the pole at 1, where the m = 0 term blows up
        let at_e = push_forward_at(&cubic(), &params, c(std::f64::consts::E, 0.0), 64).unwrap();
        assert!(!at_e.value.norm().is_finite() || at_e.value.norm() > 1e12);
        let z = c(std::f64::consts::E, 0.25);
        let a = push_forward_at(&cubic(), &params, z, 64).unwrap();
        let b = push_forward_at(&cubic(), &params, z, 128).unwrap();
        assert!((a.value - b.value).norm() < 1e-6);
        let exact = exp_push_exact(&cubic(), c(1.0, 0.0), z);
        assert!((b.value - exact).norm() < 1e-6 * exact.norm().max(1.0));
        assert!((a.value - exact).norm() <= 4.0 * a.tail);
    }

    #[test]
    fn exp_push_forward_matches_closed_form() {
        let lambda = c(1.461_204_320_912_689, 0.844_531_606_976_475_6);
        let q = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), lambda.exp()])
            .unwrap()
            .remove(0);
        let params = FamilyParams::Exp { lambda };
        for z in [c(0.4, 0.2), c(-3.0, 1.0), c(2.0, -7.0), c(0.01, 0.0)] {
            let v = push_forward_at(&q, &params, z, 256).unwrap().value;
            let exact = exp_push_exact(&q, lambda, z);
            assert!(
                (v - exact).norm() < 1e-6 * exact.norm(),
                "{z}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn zero_pushes_to_zero() {
        let q = QuadraticDifferential::zero(cubic().poles);
        for params in [
            FamilyParams::Exp {
                lambda: c(0.0, TAU),
            },
            FamilyParams::Pexp {
                p: 2,
                lambda: c(-2.0, 0.0),
            },
            FamilyParams::Av2 {
                alpha: c(2f64.sqrt(), 0.0),
                beta: c(1.0, 1.0),
            },
        ] {
            assert_eq!(
                push_forward_at(&q, &params, c(0.3, 0.4), 8).unwrap().value,
                c(0.0, 0.0)
            );
        }
    }

    #[test]
    fn preimages_and_derivatives() {
        for params in [
            FamilyParams::Exp {
                lambda: c(1.0, 0.5),
            },
            FamilyParams::Pexp {
                p: 1,
                lambda: c(-1.0, 0.0),
            },
            FamilyParams::Pexp {
                p: 2,
                lambda: c(-1.3, 0.4),
            },
            FamilyParams::Pexp {
                p: 3,
                lambda: c(0.5, 2.0),
            },
            FamilyParams::Av2 {
                alpha: c(1.3, -0.3),
                beta: c(0.9, 4.5),
            },
        ] {
            for z in [c(0.37, -0.61), c(-4.0, 0.1), c(12.0, 30.0)] {
                let mut pts = Vec::new();
                for_each_preimage(&params, z, 6, |_, w, d| pts.push((w, d))).unwrap();
                for (i, &(w, d)) in pts.iter().enumerate() {
                    let fw = params.eval(w).finite().unwrap();
                    assert!(
                        (fw - z).norm() < 1e-10 * z.norm(),
                        "{params:?} {z}: E({w}) = {fw}"
                    );
                    let dd = params.derivative(w).unwrap();
                    assert!((dd - d).norm() < 1e-9 * d.norm(), "{params:?}: {dd} vs {d}");
                    for &(u, _) in &pts[i + 1..] {
                        assert!((u - w).norm() > 1e-6);
                    }
                }
                let a = push_forward_at(&cubic(), &params, z, 32).unwrap();
                let b = push_forward_at(&cubic(), &params, z, 64).unwrap();
                assert!(
                    (a.value - b.value).norm() <= 4.0 * a.tail + 1e-14,
                    "{params:?} {z}"
                );
            }
        }
    }

    #[test]
    fn contraction_at_realized_exp() {
        // independent QUADPACK ratio from the closed-form push-forward
        let lambda = c(1.461_204_320_912_689, 0.844_531_606_976_475_6);
        let q = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), lambda.exp()])
            .unwrap()
            .remove(0);
        let r = contraction_ratio(&q, &FamilyParams::Exp { lambda }, &Default::default()).unwrap();
        assert!(
            (r.ratio_refined - 0.511_673_920_159_039_6).abs() < 1e-3,
            "{r:?}"
        );
        assert!(r.truncation_discrepancy < 1e-3);
        assert!(r.conclusive && r.ratio + r.error < 1.0);
        assert!((r.norm.value - 104.767_240_087_200_52).abs() < 1e-3 * r.norm.value);
    }

    #[test]
    fn contraction_ratio_is_scale_invariant() {
        let params = FamilyParams::Exp {
            lambda: c(0.0, TAU),
        };
        let q = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.5)])
            .unwrap()
            .remove(0);
        let s = ContractionSettings {
            truncation: 16,
            ..Default::default()
        };
        let a = contraction_ratio(&q, &params, &s).unwrap();
        let b = contraction_ratio(&q.scaled(c(0.0, -7.5)), &params, &s).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-8);
        assert!(
            contraction_ratio(&QuadraticDifferential::zero(q.poles.clone()), &params, &s).is_err()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn push_forward_is_linear(
            a in (-3.0..3.0f64, -3.0..3.0f64), b in (-3.0..3.0f64, -3.0..3.0f64),
            zr in -4.0..4.0f64, zi in -4.0..4.0f64, which in 0usize..3,
        ) {
            let z = c(zr, zi);
            prop_assume!(z.norm() > 1e-3 && (z - 1.0).norm() > 1e-3);
            let params = [
                FamilyParams::Exp { lambda: c(1.0, 0.5) },
                FamilyParams::Pexp { p: 2, lambda: c(-1.5, 0.3) },
                FamilyParams::Av2 { alpha: c(1.3, -0.3), beta: c(0.9, 4.5) },
            ][which];
            let q1 = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), c(a.0, a.1) + 5.0]).unwrap().remove(0);
            let q2 = canonical_basis(&[c(0.0, 0.0), c(1.0, 0.0), c(b.0, b.1) - 5.0]).unwrap().remove(0);
            let s = push_forward_at(&q1.sum(&q2), &params, z, 16).unwrap().value;
            let p1 = push_forward_at(&q1, &params, z, 16).unwrap().value;
            let p2 = push_forward_at(&q2, &params, z, 16).unwrap().value;
            prop_assert!((s - p1 - p2).norm() <= 1e-10 * (p1.norm() + p2.norm()).max(1.0));
        }
    }
}
