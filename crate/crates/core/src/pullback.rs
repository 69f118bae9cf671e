//! The Thurston pullback on marked configurations.
//!
//! One step solves for the map `E_n` sending the unknown level-`n+1` points to the
//! known level-`n` points, then pulls every orbit point back along its declared
//! sheet, seeded by its own level-`n` position.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{solve_parameter, FamilyParams, FamilySpec};
use crate::newton::NewtonSettings;
use crate::portrait::{winding_number, Layout, OrbitPortrait};
use crate::sphere::{mobius_invert, spherical_distance, ExtendedComplex, Finite, Infinity};

/// Pulled-back points closer than this count as a collision.
pub const COLLISION_GAP: f64 = 1e-13;

/// Positions of the marked set, indexed by [`Layout`] slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedConfiguration {
    pub positions: Vec<ExtendedComplex>,
    /// Slots of `0`, `1` and `∞`.
    pub pinned: [usize; 3],
}

impl MarkedConfiguration {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest spherical distance between same-slot points.
    pub fn displacement(&self, other: &MarkedConfiguration) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .map(|(&a, &b)| spherical_distance(a, b))
            .fold(0.0, f64::max)
    }

    fn finite(&self, slot: usize) -> Result<Complex64> {
        match self.positions.get(slot).map(|p| p.normalized()) {
            Some(Finite(z)) => Ok(z),
            Some(Infinity) => Err(Error::Other(format!("slot {slot} sits at infinity"))),
            None => Err(Error::IndexOutOfRange(slot)),
        }
    }
}

/// Minimum pairwise spherical distance.
pub fn min_spherical_gap(config: &MarkedConfiguration) -> Result<f64> {
    let p = &config.positions;
    if p.len() < 2 {
        return Err(Error::Other("need at least two marked points".into()));
    }
    let mut gap = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            gap = gap.min(spherical_distance(p[i], p[j]));
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSettings {
    /// Converged once the max spherical displacement drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub min_gap_abort: f64,
    pub newton: NewtonSettings,
}

impl Default for IterationSettings {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 500,
            min_gap_abort: 1e-8,
            newton: NewtonSettings::default(),
        }
    }
}

impl IterationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Other("tol must be positive".into()));
        }
        if !(self.min_gap_abort >= 0.0) {
            return Err(Error::Other("min_gap_abort must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_gap: f64,
    /// `|λ_n|`, or `|β_n|` for `av2`.
    pub param_modulus: f64,
    /// Real part of the winding value; the imaginary part should vanish.
    pub eta_n: f64,
    pub eta_imag: f64,
    pub displacement: f64,
    /// Max spherical distance between `E_n(new[k])` and `old[succ(k)]`.
    pub semiconjugacy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub params: FamilyParams,
    /// Configuration at level `n + 1`.
    pub config: MarkedConfiguration,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub initial: MarkedConfiguration,
    pub steps: Vec<StepRecord>,
}

impl IterationTrace {
    /// Configuration at level `n` (the input of step `n`).
    pub fn level(&self, n: usize) -> &MarkedConfiguration {
        if n == 0 {
            &self.initial
        } else {
            &self.steps[n - 1].config
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Converged,
    MaxIter,
    Degenerate,
    GeometryAbort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub status: Status,
    /// The realized parameters when converged.
    pub params: Option<FamilyParams>,
    pub trace: IterationTrace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// `0, 1, ∞` pinned; free slots equally spaced on `|z| = 2` in slot order.
pub fn initial_configuration(port: &OrbitPortrait) -> MarkedConfiguration {
    let layout = port.layout();
    let free = layout.free();
    let mut positions = vec![Infinity; layout.len];
    positions[layout.zero] = ExtendedComplex::real(0.0);
    positions[layout.one] = ExtendedComplex::real(1.0);
    for (j, &slot) in free.iter().enumerate() {
        let angle = TAU * j as f64 / free.len() as f64;
        positions[slot] = Finite(Complex64::from_polar(2.0, angle));
    }
    MarkedConfiguration {
        positions,
        pinned: layout.pinned(),
    }
}

fn solve_step_params(
    port: &OrbitPortrait,
    layout: &Layout,
    x: &MarkedConfiguration,
    prev: Option<&FamilyParams>,
    newton: &NewtonSettings,
) -> Result<FamilyParams> {
    let image_of_one = layout.orbit[port.successor(1)?];
    let target = x.finite(image_of_one)?;
    let m = port.branch[1];
    match port.family {
        FamilySpec::Exp => solve_parameter(FamilySpec::Exp, target, m, None, None, newton),
        FamilySpec::Pexp { p } => {
            let critical = layout.critical.expect("pexp layout has a critical slot");
            if critical == layout.one {
                // the critical point is pinned at 1, so c = −p/λ forces λ = −p
                return Ok(FamilyParams::Pexp {
                    p,
                    lambda: Complex64::new(-(p as f64), 0.0),
                });
            }
            let seed = match prev {
                Some(prev) => *prev,
                None => {
                    let lambda = match port.seed_lambda {
                        Some(l) => l,
                        None => -(p as f64) / x.finite(critical)?,
                    };
                    FamilyParams::Pexp { p, lambda }
                }
            };
            solve_parameter(port.family, target, m, None, Some(&seed), newton)
        }
        FamilySpec::Av2 => {
            let aux = x.positions[layout.asymptotic2.ok_or(Error::InvalidPortrait(vec![
                "av2 portrait needs a second_orbit".into(),
            ]))?];
            solve_parameter(FamilySpec::Av2, target, m, Some(aux), prev, newton)
        }
    }
}

/// One pullback step from level `n` to level `n + 1`.
pub fn pullback_step(
    port: &OrbitPortrait,
    config: &MarkedConfiguration,
    prev: Option<&FamilyParams>,
    newton: &NewtonSettings,
) -> Result<(FamilyParams, MarkedConfiguration, Diagnostics)> {
    let layout = port.layout();
    if config.len() != layout.len {
        return Err(Error::Other(format!(
            "configuration has {} points, portrait needs {}",
            config.len(),
            layout.len
        )));
    }
    let params = solve_step_params(port, &layout, config, prev, newton)?;
    let mut next = config.clone();
    for pull in &layout.pulls {
        if layout.is_pinned(pull.slot) {
            continue;
        }
        let w = config.finite(pull.image)?;
        let seed = config.finite(pull.slot)?;
        let z = params.inverse_branch(w, pull.branch, seed, newton)?;
        next.positions[pull.slot] = ExtendedComplex::new(z);
    }
    if let Some(c) = layout.critical {
        if c != layout.one {
            next.positions[c] = ExtendedComplex::new(params.critical_point().expect("pexp"));
        }
    }

    let mut semiconjugacy: f64 = 0.0;
    for pull in &layout.pulls {
        let z = next.finite(pull.slot)?;
        semiconjugacy = semiconjugacy.max(spherical_distance(
            params.eval(z),
            config.positions[pull.image],
        ));
    }
    if let Some(c) = layout.critical {
        let z = next.finite(c)?;
        semiconjugacy = semiconjugacy.max(spherical_distance(
            params.eval(z),
            config.positions[layout.one],
        ));
    }

    let min_gap = min_spherical_gap(&next)?;
    if min_gap < COLLISION_GAP {
        return Err(Error::Collision { gap: min_gap });
    }
    let eta = winding_number(port, &next, &params)?;
    let diagnostics = Diagnostics {
        min_gap,
        param_modulus: params.modulus(),
        eta_n: eta.re,
        eta_imag: eta.im,
        displacement: next.displacement(config),
        semiconjugacy,
    };
    Ok((params, next, diagnostics))
}

/// Runs the pullback from [`initial_configuration`] until the displacement drops
/// below `tol`, the geometry degenerates, or `max_iter` steps pass.
pub fn iterate(port: &OrbitPortrait, settings: &IterationSettings) -> IterationResult {
    let initial = initial_configuration(port);
    let mut trace = IterationTrace {
        initial: initial.clone(),
        steps: Vec::new(),
    };
    let violations = port.validate();
    if !violations.is_empty() {
        return IterationResult {
            status: Status::Degenerate,
            params: None,
            trace,
            message: Some(Error::InvalidPortrait(violations).to_string()),
        };
    }
    let mut config = initial;
    let mut prev: Option<FamilyParams> = None;
    for step in 0..settings.max_iter {
        let (params, next, diagnostics) =
            match pullback_step(port, &config, prev.as_ref(), &settings.newton) {
                Ok(out) => out,
                Err(e) => {
                    return IterationResult {
                        status: Status::Degenerate,
                        params: None,
                        trace,
                        message: Some(format!("step {step}: {e}")),
                    }
                }
            };
        trace.steps.push(StepRecord {
            step,
            params,
            config: next.clone(),
            diagnostics,
        });
        if diagnostics.min_gap < settings.min_gap_abort {
            return IterationResult {
                status: Status::GeometryAbort,
                params: None,
                trace,
                message: Some(format!("step {step}: min gap {:e}", diagnostics.min_gap)),
            };
        }
        if diagnostics.displacement < settings.tol {
            let eta = port.eta as f64;
            if (diagnostics.eta_n - eta).abs() > 1e-6 || diagnostics.eta_imag.abs() > 1e-6 {
                // the limit realizes different combinatorics than declared
                return IterationResult {
                    status: Status::Degenerate,
                    params: None,
                    trace,
                    message: Some(format!(
                        "converged with winding number {:.6}, portrait declares {}",
                        diagnostics.eta_n, port.eta
                    )),
                };
            }
            return IterationResult {
                status: Status::Converged,
                params: Some(params),
                trace,
                message: None,
            };
        }
        config = next;
        prev = Some(params);
    }
    IterationResult {
        status: Status::MaxIter,
        params: None,
        trace,
        message: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactnessReport {
    /// Smallest observed modulus entering the upper bound.
    pub kappa: f64,
    /// Largest observed modulus entering the upper bound (`pexp` only; else `kappa`).
    #[serde(rename = "K")]
    pub big_k: f64,
    pub bound: f64,
    /// `κ → 0` makes the bound meaningless.
    pub vacuous: bool,
    pub max_param_modulus: f64,
    /// Smallest per-step lower bound on the parameter modulus forced by the geometry.
    pub kappa_lower: f64,
    pub lower_satisfied: bool,
    /// Every recorded modulus obeys the upper bound.
    pub satisfied: bool,
}

/// Relative slack for floating-point ties in the bound comparisons.
const BOUND_SLACK: f64 = 1e-12;

/// Smallest `r > 0` with `(r/p)^p e^{p + r} ≥ t`; `|E(1)|` cannot reach `t` for smaller `|λ|`.
fn pexp_lower_radius(p: u32, t: f64) -> f64 {
    let pf = p as f64;
    let h = |r: f64| pf * (r / pf).ln() + pf + r - t.ln();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Checks the observed parameter moduli against the compactness bounds.
///
/// Upper bounds: `|λ_n| ≤ 2π|η|/κ` (`exp`, and `|β_n|` for `av2`) with
/// `κ = min |c_k2 − c_k1|` over the trace; for non-periodic `pexp`
/// `|λ_n| ≤ (2π|η| + log K − log κ + 4π)/κ` with `κ, K` the extreme values of
/// `|c_k1|, |c_k2|, |Δc|`; for periodic `pexp` `|λ_n| = p/|c_n| ≤ p/κ`.
///
/// Lower bound: at each step the modulus must be at least what is needed to
/// move `1` to the level-`n` image of `c_1`: `log(1 + |x − 1|)` for `exp`, the
/// same after `M_α⁻¹` for `av2`, and the root of `(r/p)^p e^{p+r} = |x|` for `pexp`.
pub fn compactness_bound_check(trace: &IterationTrace, port: &OrbitPortrait) -> CompactnessReport {
    let layout = port.layout();
    let mut kappa = f64::INFINITY;
    let mut big_k: f64 = 0.0;
    let mut max_mod: f64 = 0.0;
    let mut kappa_lower = f64::INFINITY;
    let mut lower_ok = true;
    let periodic = port.is_periodic_critical();
    let image_of_one = port
        .successor(1)
        .map(|k| layout.orbit[k])
        .unwrap_or(layout.one);
    for (n, rec) in trace.steps.iter().enumerate() {
        let cfg = &rec.config;
        let pos = |slot: usize| {
            cfg.positions[slot]
                .finite()
                .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
        };
        if periodic {
            let c = layout.critical.map(pos).unwrap_or_default();
            kappa = kappa.min(c.norm());
            big_k = big_k.max(c.norm());
        } else {
            let a = pos(layout.orbit[port.k1]);
            let b = pos(layout.orbit[port.k2()]);
            let d = (b - a).norm();
            kappa = kappa.min(d);
            big_k = big_k.max(d);
            if let FamilySpec::Pexp { .. } = port.family {
                for m in [a.norm(), b.norm()] {
                    kappa = kappa.min(m);
                    big_k = big_k.max(m);
                }
            }
        }
        let modulus = rec.diagnostics.param_modulus;
        max_mod = max_mod.max(modulus);

        let x = trace.level(n).positions[image_of_one].finite();
        let lower = match (x, rec.params) {
            (Some(x), FamilyParams::Exp { .. }) => (1.0 + (x - 1.0).norm()).ln(),
            (Some(x), FamilyParams::Av2 { alpha, .. }) => match mobius_invert(alpha, Finite(x)) {
                Ok(Finite(u)) => (1.0 + (u - 1.0).norm()).ln(),
                _ => 0.0,
            },
            (Some(x), FamilyParams::Pexp { p, .. }) if x.norm() > 0.0 => {
                pexp_lower_radius(p, x.norm())
            }
            _ => 0.0,
        };
        kappa_lower = kappa_lower.min(lower);
        if lower > modulus * (1.0 + BOUND_SLACK) {
            lower_ok = false;
        }
    }
    if trace.steps.is_empty() {
        kappa = 0.0;
        kappa_lower = 0.0;
    }
    let eta = port.eta.unsigned_abs() as f64;
    let vacuous = !(kappa > 0.0) || !kappa.is_finite();
    let bound = if vacuous {
        f64::INFINITY
    } else {
        match port.family {
            FamilySpec::Exp | FamilySpec::Av2 => TAU * eta / kappa,
            FamilySpec::Pexp { p } if periodic => p as f64 / kappa,
            FamilySpec::Pexp { .. } => (TAU * eta + big_k.ln() - kappa.ln() + 2.0 * TAU) / kappa,
        }
    };
    let satisfied = trace
        .steps
        .iter()
        .all(|r| r.diagnostics.param_modulus <= bound * (1.0 + BOUND_SLACK));
    CompactnessReport {
        kappa,
        big_k: if matches!(port.family, FamilySpec::Pexp { .. }) {
            big_k
        } else {
            kappa
        },
        bound,
        vacuous,
        max_param_modulus: max_mod,
        kappa_lower,
        lower_satisfied: lower_ok,
        satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::branch_log;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_k1_l1() -> OrbitPortrait {
        OrbitPortrait {
            k1: 1,
            l: 1,
            branch: vec![0, 0, 1],
            ..OrbitPortrait::exp_fixed(1)
        }
    }

    #[test]
    fn initial_configuration_examples() {
        let cfg = initial_configuration(&OrbitPortrait::exp_fixed(1));
        assert_eq!(
            cfg.positions,
            vec![Finite(c(0.0, 0.0)), Finite(c(1.0, 0.0)), Infinity]
        );
        let cfg = initial_configuration(&exp_k1_l1());
        assert_eq!(cfg.positions[2], Finite(c(2.0, 0.0)));
        let port = OrbitPortrait {
            k1: 1,
            l: 3,
            branch: vec![0, 0, 0, 0, 1],
            ..OrbitPortrait::exp_fixed(1)
        };
        let cfg = initial_configuration(&port);
        for (j, slot) in [2, 3, 4].into_iter().enumerate() {
            let expected = Complex64::from_polar(2.0, TAU * j as f64 / 3.0);
            assert!((cfg.positions[slot].finite().unwrap() - expected).norm() < 1e-15);
        }
        assert!(min_spherical_gap(&cfg).unwrap() >= 1e-2);
    }

    #[test]
    fn min_gap_examples() {
        let cfg = initial_configuration(&OrbitPortrait::exp_fixed(1));
        assert!((min_spherical_gap(&cfg).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let cfg = initial_configuration(&exp_k1_l1());
        assert!((min_spherical_gap(&cfg).unwrap() - 0.1f64.sqrt()).abs() < 1e-15);
        let one = MarkedConfiguration {
            positions: vec![Infinity],
            pinned: [0, 0, 0],
        };
        assert!(min_spherical_gap(&one).is_err());
    }

    #[test]
    fn fixed_exp_step_is_identity() {
        for eta in 1..=3 {
            let port = OrbitPortrait::exp_fixed(eta);
            let cfg = initial_configuration(&port);
            let (params, next, d) = pullback_step(&port, &cfg, None, &Default::default()).unwrap();
            assert_eq!(
                params,
                FamilyParams::Exp {
                    lambda: c(0.0, TAU * eta as f64)
                }
            );
            assert_eq!(next, cfg);
            assert_eq!(d.displacement, 0.0);
            assert_eq!(d.eta_n, eta as f64);
        }
    }

    #[test]
    fn fixed_pexp_step_is_identity() {
        for p in 1..=3 {
            let port = OrbitPortrait::pexp_fixed_critical(p);
            let cfg = initial_configuration(&port);
            let (params, next, d) = pullback_step(&port, &cfg, None, &Default::default()).unwrap();
            assert_eq!(params.rate(), c(-(p as f64), 0.0));
            assert_eq!(next, cfg);
            assert!(d.semiconjugacy < 1e-15);
        }
    }

    #[test]
    fn exp_single_step_matches_closed_form() {
        let port = exp_k1_l1();
        let cfg = initial_configuration(&port);
        let (params, next, d) = pullback_step(&port, &cfg, None, &Default::default()).unwrap();
        // hand-rolled: λ = log_0(2), c₂' = log_1(2)/λ
        let lambda = branch_log(c(2.0, 0.0), 0).unwrap();
        let c2 = branch_log(c(2.0, 0.0), 1).unwrap() / lambda;
        assert_eq!(params.rate(), lambda);
        assert!((next.positions[2].finite().unwrap() - c2).norm() < 1e-15);
        assert!((d.eta_n - 1.0).abs() < 1e-12);
        assert!(d.semiconjugacy < 1e-12);
    }

    #[test]
    fn exp_k1_l1_converges() {
        let port = exp_k1_l1();
        let res = iterate(&port, &IterationSettings::default());
        assert_eq!(res.status, Status::Converged, "{:?}", res.message);
        let lambda = res.params.unwrap().rate();
        assert!(
            (lambda - c(1.461204320912689, 0.8445316069764756)).norm() < 1e-8,
            "{lambda}"
        );
        assert!(res.trace.steps.len() <= 200);
        for rec in &res.trace.steps {
            for s in rec.config.pinned {
                assert_eq!(
                    rec.config.positions[s]
                        .finite()
                        .map(|z| (z.re.to_bits(), z.im.to_bits())),
                    res.trace.initial.positions[s]
                        .finite()
                        .map(|z| (z.re.to_bits(), z.im.to_bits()))
                );
            }
            assert!(rec.diagnostics.semiconjugacy < 1e-10);
            assert!((rec.diagnostics.eta_n - 1.0).abs() < 1e-6);
        }
        let report = compactness_bound_check(&res.trace, &port);
        assert!(report.satisfied && report.lower_satisfied, "{report:?}");
    }

    #[test]
    fn av2_converges_and_verifies() {
        let port = OrbitPortrait {
            family: FamilySpec::Av2,
            branch: vec![0, 0, 1],
            second_orbit: Some(crate::portrait::SecondOrbit {
                k1: 0,
                l: 1,
                succ: None,
                branch: vec![1, 0],
            }),
            ..exp_k1_l1()
        };
        let res = iterate(&port, &IterationSettings::default());
        assert_eq!(res.status, Status::Converged, "{:?}", res.message);
        let params = res.params.unwrap();
        let FamilyParams::Av2 { alpha, beta } = params else {
            panic!()
        };
        // reference roots from an independent 40-digit solve of the orbit equations
        assert!((alpha * alpha - c(1.807410042017876, -0.823576134434732)).norm() < 1e-8);
        assert!((beta - c(0.924518836169025, 4.490573991749434)).norm() < 1e-8);
        let report = crate::verify::orbit_verify(&params, &port, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn pexp_nonperiodic_converges() {
        let port = OrbitPortrait {
            family: FamilySpec::Pexp { p: 1 },
            critical_case: Some(crate::portrait::CriticalCase::NonperiodicCAndFc),
            ..exp_k1_l1()
        };
        let res = iterate(&port, &IterationSettings::default());
        assert_eq!(res.status, Status::Converged, "{:?}", res.message);
        let params = res.params.unwrap();
        assert!((params.rate() - c(0.720623833545426, -0.381372660097765)).norm() < 1e-8);
        let report = crate::verify::orbit_verify(&params, &port, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn fixed_point_is_idempotent() {
        let port = exp_k1_l1();
        let res = iterate(
            &port,
            &IterationSettings {
                tol: 1e-14,
                max_iter: 400,
                ..Default::default()
            },
        );
        let last = res.trace.steps.last().unwrap();
        let (p1, c1, _) =
            pullback_step(&port, &last.config, Some(&last.params), &Default::default()).unwrap();
        let (p2, c2, _) = pullback_step(&port, &c1, Some(&p1), &Default::default()).unwrap();
        assert!(c1.displacement(&last.config) < 1e-13);
        assert!((p1.rate() - p2.rate()).norm() < 1e-13);
        assert!(c2.displacement(&c1) < 1e-13);
    }

    #[test]
    fn fixed_exp_compactness_is_tight() {
        for eta in 1..=3 {
            let port = OrbitPortrait::exp_fixed(eta);
            let res = iterate(&port, &IterationSettings::default());
            let r = compactness_bound_check(&res.trace, &port);
            assert_eq!(r.kappa, 1.0);
            assert!((r.bound - TAU * eta as f64).abs() < 1e-12);
            assert!(r.satisfied && r.lower_satisfied && !r.vacuous);
        }
    }

    #[test]
    fn vacuous_bound_when_kappa_vanishes() {
        let port = OrbitPortrait::exp_fixed(1);
        let trace = IterationTrace {
            initial: initial_configuration(&port),
            steps: vec![],
        };
        let r = compactness_bound_check(&trace, &port);
        assert!(r.vacuous && r.bound.is_infinite());
    }

    #[test]
    fn invalid_portrait_is_not_iterated() {
        let res = iterate(&OrbitPortrait::exp_fixed(0), &IterationSettings::default());
        assert_eq!(res.status, Status::Degenerate);
        assert!(res.trace.steps.is_empty());
    }

    #[test]
    fn pexp_lower_radius_inverts() {
        for p in 1..=3u32 {
            for t in [0.3, 1.0, 5.0, 100.0] {
                let r = pexp_lower_radius(p, t);
                let v = (r / p as f64).powi(p as i32) * (p as f64 + r).exp();
                assert!((v - t).abs() < 1e-9 * t, "p={p} t={t} r={r} v={v}");
            }
        }
    }
}
