//! Independent checks of realized parameters: forward orbit iteration, and a
//! multi-start Newton solver on the orbit equations that never touches the
//! pullback.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{av2_second_value, pexp_log_alpha, FamilyParams, FamilySpec};
use crate::newton::{solve_system, NewtonSettings};
use crate::portrait::{winding_number, OrbitPortrait};
use crate::pullback::{min_spherical_gap, MarkedConfiguration};
use crate::sphere::{
    branch_log, mobius_invert, spherical_distance, ExtendedComplex, Finite, Infinity,
};

/// Orbit points closer than this mean the portrait has collapsed.
pub const MIN_ORBIT_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residual: f64,
    pub min_orbit_gap: f64,
    pub pass: bool,
    /// `c_0, c_1, …, c_{k1+l+1}` as computed by forward iteration.
    pub orbit: Vec<ExtendedComplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_orbit: Option<Vec<ExtendedComplex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

fn forward_orbit(
    params: &FamilyParams,
    start: ExtendedComplex,
    len: usize,
) -> Vec<ExtendedComplex> {
    let mut out = vec![start];
    for _ in 1..len {
        let next = match out.last().copied().unwrap_or(Infinity).normalized() {
            Finite(z) => params.eval(z).normalized(),
            Infinity => Infinity,
        };
        out.push(next);
    }
    out
}

/// Iterates the map on its singular values and measures how far the declared
/// preperiodicity `c_{k1+l+1} = c_{k1+1}` fails, on the sphere.
pub fn orbit_verify(params: &FamilyParams, port: &OrbitPortrait, tol: f64) -> Result<VerifyReport> {
    params.validate()?;
    if params.spec() != port.family {
        return Err(Error::InvalidParams(format!(
            "parameters are {} but the portrait is {}",
            params.spec().name(),
            port.family.name()
        )));
    }
    let n = port.orbit_len();
    let start = match *params {
        FamilyParams::Pexp { .. } => Finite(params.critical_point().expect("pexp")),
        _ => ExtendedComplex::real(0.0),
    };
    let orbit = forward_orbit(params, start, n + 1);
    let mut residual = spherical_distance(orbit[n], orbit[port.k1 + 1]);
    // distinct marked points of the orbit
    let mut marked: Vec<ExtendedComplex> = orbit[..n].to_vec();
    if port.is_periodic_critical() {
        residual = residual.max(spherical_distance(orbit[port.l], orbit[0]));
        marked.remove(0);
    }
    if let FamilyParams::Pexp { .. } = params {
        marked.push(ExtendedComplex::real(0.0));
    }
    let mut second = None;
    if let (FamilyParams::Av2 { alpha, .. }, Some(s)) = (params, &port.second_orbit) {
        let m = s.k1 + s.l + 1;
        let o = forward_orbit(params, av2_second_value(*alpha), m + 1);
        residual = residual.max(spherical_distance(o[m], o[s.k1 + 1]));
        marked.extend_from_slice(&o[..m]);
        second = Some(o);
    }
    let diverged = orbit
        .iter()
        .chain(second.iter().flatten())
        .any(|p| p.is_infinite());
    let gap = min_spherical_gap(&MarkedConfiguration {
        positions: marked,
        pinned: [0, 0, 0],
    })
    .unwrap_or(f64::INFINITY);
    let pass = !diverged && residual < tol && gap > MIN_ORBIT_GAP;
    Ok(VerifyReport {
        residual,
        min_orbit_gap: gap,
        pass,
        orbit,
        second_orbit: second,
        message: diverged.then(|| "orbit diverged to infinity".to_string()),
    })
}

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub starts: u64,
    /// Starts are drawn from `[−box, box]²` per complex unknown.
    pub half_width: f64,
    pub newton: NewtonSettings,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            starts: 32,
            half_width: 6.0,
            newton: NewtonSettings {
                max_iter: 200,
                residual_tol: 1e-12,
                step_cap: 4.0,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub params: FamilyParams,
    pub config: MarkedConfiguration,
    /// 1-based Halton index of the start that produced it.
    pub start: u64,
    pub residual: f64,
}

type Unknowns<'a> = &'a [Complex64];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Exp,
    Log,
}
type System = Option<(Vec<Complex64>, Vec<Vec<Complex64>>)>;

/// How unknowns map onto parameters and slots.
struct Problem<'a> {
    port: &'a OrbitPortrait,
    len: usize,
    /// Number of leading parameter unknowns.
    n_params: usize,
    free: Vec<usize>,
    /// `(slot, image slot, sheet)` for each orbit equation.
    equations: Vec<(usize, usize, i64)>,
    critical: Option<usize>,
    asymptotic2: Option<usize>,
    pinned: [usize; 3],
}

impl<'a> Problem<'a> {
    fn new(port: &'a OrbitPortrait) -> Self {
        let layout = port.layout();
        let free = layout.free();
        let equations = layout
            .pulls
            .iter()
            // E(0) = 1 holds identically for exp and av2
            .filter(|p| p.slot != layout.zero)
            .map(|p| (p.slot, p.image, p.branch))
            .collect();
        Problem {
            port,
            len: layout.len,
            n_params: if port.family == FamilySpec::Av2 { 2 } else { 1 },
            free,
            equations,
            critical: layout.critical,
            asymptotic2: layout.asymptotic2,
            pinned: layout.pinned(),
        }
    }

    fn unknowns(&self) -> usize {
        self.n_params + self.free.len()
    }

    /// Slot positions with the free ones read from `u`.
    fn positions(&self, u: Unknowns) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); self.len];
        z[self.pinned[1]] = Complex64::new(1.0, 0.0);
        for (j, &s) in self.free.iter().enumerate() {
            z[s] = u[self.n_params + j];
        }
        z
    }

    /// Column of slot `s` in the Jacobian, if it is an unknown.
    fn column(&self, s: usize) -> Option<usize> {
        self.free
            .iter()
            .position(|&f| f == s)
            .map(|j| self.n_params + j)
    }

    fn params(&self, u: Unknowns) -> FamilyParams {
        match self.port.family {
            FamilySpec::Exp => FamilyParams::Exp { lambda: u[0] },
            FamilySpec::Pexp { p } => FamilyParams::Pexp { p, lambda: u[0] },
            FamilySpec::Av2 => FamilyParams::Av2 {
                alpha: u[0],
                beta: u[1],
            },
        }
    }

    /// Orbit equations plus the side conditions `λ z_c + p = 0` (`pexp`) and
    /// `α²(z_λ − 1) − z_λ = 0` (`av2`). `Form::Exp` is `E(z_k) − z_succ(k)`;
    /// `Form::Log` takes logarithms on the declared sheets, which widens the
    /// basins but presumes the branch data.
    fn system(&self, u: Unknowns, form: Form) -> System {
        let z = self.positions(u);
        let n = self.unknowns();
        let mut f = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let one = Complex64::new(1.0, 0.0);
        for &(slot, image, m) in &self.equations {
            if Some(slot) == self.critical {
                continue;
            }
            let x = z[slot];
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            if form == Form::Log {
                let (value, d_params, d_x, d_w) = self.log_row(u, x, z[image], m)?;
                for (j, dp) in d_params.into_iter().enumerate() {
                    row[j] = dp;
                }
                if let Some(col) = self.column(slot) {
                    row[col] += d_x;
                }
                if let Some(col) = self.column(image) {
                    row[col] += d_w;
                }
                f.push(value);
                jac.push(row);
                continue;
            }
            let (value, d_params, d_z) = match self.port.family {
                FamilySpec::Exp => {
                    let e = (u[0] * x).exp();
                    (e, vec![x * e], u[0] * e)
                }
                FamilySpec::Pexp { p } => {
                    let pf = p as f64;
                    let lambda = u[0];
                    let e = (-lambda * x / pf).powu(p) * (lambda * x + pf).exp();
                    let dz = if x.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        e * (pf / x + lambda)
                    };
                    (e, vec![e * (pf / lambda + x)], dz)
                }
                FamilySpec::Av2 => {
                    let (alpha, beta) = (u[0], u[1]);
                    let s = alpha * alpha;
                    let w = (beta * x).exp();
                    let d = (s - one) * w + one;
                    let d2 = d * d;
                    let g = s * w / d;
                    let dg_ds = w * (one - w) / d2;
                    (
                        g,
                        vec![alpha * 2.0 * dg_ds, x * s * w / d2],
                        beta * s * w / d2,
                    )
                }
            };
            for (j, dp) in d_params.into_iter().enumerate() {
                row[j] = dp;
            }
            if let Some(col) = self.column(slot) {
                row[col] += d_z;
            }
            if let Some(col) = self.column(image) {
                row[col] -= one;
            }
            f.push(value - z[image]);
            jac.push(row);
        }
        if let (FamilySpec::Pexp { p }, Some(c)) = (self.port.family, self.critical) {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            row[0] = z[c];
            if let Some(col) = self.column(c) {
                row[col] = u[0];
            }
            f.push(u[0] * z[c] + p as f64);
            jac.push(row);
        }
        if let Some(a) = self.asymptotic2 {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let s = u[0] * u[0];
            row[0] = u[0] * 2.0 * (z[a] - one);
            if let Some(col) = self.column(a) {
                row[col] = s - one;
            }
            f.push(s * (z[a] - one) - z[a]);
            jac.push(row);
        }
        let finite = f
            .iter()
            .chain(jac.iter().flatten())
            .all(|v| v.re.is_finite() && v.im.is_finite());
        (finite && f.len() == n).then_some((f, jac))
    }

    /// `log E(x) − log_m(w)` with its derivatives in the parameters, `x` and `w`.
    fn log_row(
        &self,
        u: Unknowns,
        x: Complex64,
        w: Complex64,
        m: i64,
    ) -> Option<(Complex64, Vec<Complex64>, Complex64, Complex64)> {
        let one = Complex64::new(1.0, 0.0);
        let lw = if self.port.family == FamilySpec::Av2 {
            Complex64::new(0.0, 0.0)
        } else {
            branch_log(w, m).ok()?
        };
        Some(match self.port.family {
            FamilySpec::Exp => (u[0] * x - lw, vec![x], u[0], -one / w),
            FamilySpec::Pexp { p } => {
                let pf = p as f64;
                let lambda = u[0];
                let value =
                    branch_log(x, 0).ok()? * pf + lambda * x + pexp_log_alpha(p, lambda).ok()? - lw;
                (value, vec![x + pf / lambda], pf / x + lambda, -one / w)
            }
            FamilySpec::Av2 => {
                let (alpha, beta) = (u[0], u[1]);
                let s = alpha * alpha;
                let den = s - (s - one) * w;
                let v = w / den;
                let value = beta * x - branch_log(v, m).ok()?;
                let d_alpha = alpha * 2.0 * (one - w) / den;
                (value, vec![d_alpha, x], beta, -s / (den * w))
            }
        })
    }

    fn config(&self, u: Unknowns) -> MarkedConfiguration {
        let mut positions: Vec<ExtendedComplex> = self
            .positions(u)
            .into_iter()
            .map(ExtendedComplex::new)
            .collect();
        positions[self.pinned[2]] = Infinity;
        MarkedConfiguration {
            positions,
            pinned: self.pinned,
        }
    }
}

/// Sheet label of `z` as a preimage of `w`, measured on the `[0, 2π)` sheets.
pub fn sheet_label(params: &FamilyParams, z: Complex64, w: Complex64) -> Result<f64> {
    let lifted = match *params {
        FamilyParams::Exp { lambda } => lambda * z - branch_log(w, 0)?,
        FamilyParams::Av2 { alpha, beta } => match mobius_invert(alpha, Finite(w))? {
            Finite(u) => beta * z - branch_log(u, 0)?,
            Infinity => return Err(Error::OmittedValue(format!("{w}"))),
        },
        FamilyParams::Pexp { p, lambda } => {
            branch_log(z, 0)? * p as f64 + lambda * z + pexp_log_alpha(p, lambda)?
                - branch_log(w, 0)?
        }
    };
    Ok(lifted.im / TAU)
}

/// Whether a solved configuration carries the portrait's branch data.
fn matches_portrait(
    port: &OrbitPortrait,
    params: &FamilyParams,
    cfg: &MarkedConfiguration,
) -> bool {
    let layout = port.layout();
    if params.validate().is_err() {
        return false;
    }
    if min_spherical_gap(cfg).map_or(true, |g| g <= MIN_ORBIT_GAP) {
        return false;
    }
    for pull in &layout.pulls {
        let (Some(z), Some(w)) = (
            cfg.positions[pull.slot].finite(),
            cfg.positions[pull.image].finite(),
        ) else {
            return false;
        };
        match sheet_label(params, z, w) {
            Ok(label) if (label - pull.branch as f64).abs() < 1e-6 => {}
            _ => return false,
        }
    }
    match winding_number(port, cfg, params) {
        Ok(eta) => (eta.re - port.eta as f64).abs() < 1e-6 && eta.im.abs() < 1e-6,
        Err(_) => false,
    }
}

/// Solves the orbit equations from deterministic Halton starts and returns the
/// lowest-indexed solution whose recomputed sheet labels and winding number
/// match the portrait.
pub fn oracle_solve(port: &OrbitPortrait, settings: &OracleSettings) -> Result<OracleSolution> {
    let violations = port.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidPortrait(violations));
    }
    let problem = Problem::new(port);
    let n = problem.unknowns();
    if 2 * n > PRIMES.len() {
        return Err(Error::Other(format!(
            "{n} complex unknowns is beyond desk scale"
        )));
    }
    let results: Vec<(u64, Option<OracleSolution>, bool)> = (1..=settings.starts)
        .into_par_iter()
        .map(|index| {
            let start: Vec<Complex64> = (0..n)
                .map(|j| {
                    let re = halton(index, PRIMES[2 * j]);
                    let im = halton(index, PRIMES[2 * j + 1]);
                    Complex64::new(
                        settings.half_width * (2.0 * re - 1.0),
                        settings.half_width * (2.0 * im - 1.0),
                    )
                })
                .collect();
            // log form on the declared sheets, polished in exponential form;
            // then plain exponential form from the raw start
            let exp_solve = |u: Vec<Complex64>| {
                solve_system(u, &settings.newton, |v| problem.system(v, Form::Exp))
            };
            let candidates = [
                solve_system(start.clone(), &settings.newton, |v| {
                    problem.system(v, Form::Log)
                })
                .and_then(|(u, _)| exp_solve(u)),
                exp_solve(start),
            ];
            let mut converged = false;
            for (u, residual) in candidates.into_iter().flatten() {
                converged = true;
                let params = problem.params(&u);
                let config = problem.config(&u);
                if matches_portrait(port, &params, &config) {
                    return (
                        index,
                        Some(OracleSolution {
                            params,
                            config,
                            start: index,
                            residual,
                        }),
                        true,
                    );
                }
            }
            (index, None, converged)
        })
        .collect();
    let converged = results.iter().filter(|r| r.2).count();
    results
        .into_iter()
        .find_map(|r| r.1)
        .ok_or(Error::OracleNoMatch { converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portrait::SecondOrbit;

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
    fn halton_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn verify_fixed_cases() {
        let port = OrbitPortrait::exp_fixed(1);
        let r = orbit_verify(
            &FamilyParams::Exp {
                lambda: c(0.0, TAU),
            },
            &port,
            1e-12,
        )
        .unwrap();
        assert!(r.pass);
        assert!(r.residual < 1e-15);
        let bad = orbit_verify(
            &FamilyParams::Exp {
                lambda: c(0.1, TAU),
            },
            &port,
            1e-9,
        )
        .unwrap();
        assert!(!bad.pass);
        let port = OrbitPortrait::pexp_fixed_critical(1);
        let r = orbit_verify(
            &FamilyParams::Pexp {
                p: 1,
                lambda: c(-1.0, 0.0),
            },
            &port,
            1e-12,
        )
        .unwrap();
        assert!(r.pass && r.residual == 0.0);
    }

    #[test]
    fn verify_reports_divergence() {
        let port = OrbitPortrait {
            k1: 2,
            l: 1,
            branch: vec![0, 0, 0, 1],
            ..OrbitPortrait::exp_fixed(1)
        };
        let r = orbit_verify(
            &FamilyParams::Exp {
                lambda: c(800.0, 0.0),
            },
            &port,
            1e-9,
        )
        .unwrap();
        assert!(!r.pass);
        assert!(r.message.is_some());
    }

    #[test]
    fn verify_rejects_family_mismatch() {
        let port = OrbitPortrait::exp_fixed(1);
        assert!(orbit_verify(
            &FamilyParams::Pexp {
                p: 1,
                lambda: c(-1.0, 0.0)
            },
            &port,
            1e-9
        )
        .is_err());
    }

    #[test]
    fn oracle_fixed_cases() {
        let s = oracle_solve(&OrbitPortrait::exp_fixed(1), &Default::default()).unwrap();
        assert!((s.params.rate() - c(0.0, TAU)).norm() < 1e-12);
        // 2πiη leaves the default box for η ≥ 2
        let wide = OracleSettings {
            half_width: 24.0,
            starts: 64,
            ..Default::default()
        };
        for eta in 2..=3 {
            let s = oracle_solve(&OrbitPortrait::exp_fixed(eta), &wide).unwrap();
            assert!((s.params.rate() - c(0.0, TAU * eta as f64)).norm() < 1e-12);
        }
        for p in 1..=2 {
            let s =
                oracle_solve(&OrbitPortrait::pexp_fixed_critical(p), &Default::default()).unwrap();
            assert!((s.params.rate() - c(-(p as f64), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn oracle_exp_k1_l1() {
        let s = oracle_solve(&exp_k1_l1(), &Default::default()).unwrap();
        assert!(
            (s.params.rate() - c(1.461204320912689, 0.8445316069764756)).norm() < 1e-10,
            "{:?}",
            s.params
        );
        let r = orbit_verify(&s.params, &exp_k1_l1(), 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn oracle_agrees_with_pullback_across_branches() {
        // parameters from an independent script, to 4 digits
        let cases = [
            ((1, 0), c(-1.4612, 7.1277)),
            ((0, 2), c(1.8709, 0.9595)),
            ((-1, 1), c(0.9230, -3.5009)),
            ((1, 2), c(0.6846, 6.3366)),
            ((0, -1), c(0.0, std::f64::consts::PI)),
        ];
        for ((m1, m2), lambda) in cases {
            let port = OrbitPortrait {
                k1: 1,
                l: 1,
                branch: vec![0, m1, m2],
                eta: m2 - m1,
                ..OrbitPortrait::exp_fixed(1)
            };
            let s = oracle_solve(&port, &Default::default()).unwrap();
            assert!(
                (s.params.rate() - lambda).norm() < 1e-4,
                "({m1},{m2}): {:?}",
                s.params
            );
            let run = crate::pullback::iterate(&port, &Default::default());
            let realized = run.params.unwrap().rate();
            assert!(
                spherical_distance(Finite(realized), Finite(s.params.rate())) < 1e-8,
                "({m1},{m2}): {realized} vs {}",
                s.params.rate()
            );
        }
    }

    #[test]
    fn oracle_agrees_with_pullback_for_av2() {
        // 0 → 1 → c2 ↺ and λ → c'1 ↺
        let port = OrbitPortrait {
            family: FamilySpec::Av2,
            branch: vec![0, 0, 1],
            second_orbit: Some(SecondOrbit {
                k1: 0,
                l: 1,
                succ: None,
                branch: vec![1, 0],
            }),
            ..exp_k1_l1()
        };
        let s = oracle_solve(
            &port,
            &OracleSettings {
                starts: 64,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(orbit_verify(&s.params, &port, 1e-8).unwrap().pass);
        let run = crate::pullback::iterate(&port, &Default::default());
        let (
            FamilyParams::Av2 {
                alpha: a1,
                beta: b1,
            },
            Some(FamilyParams::Av2 {
                alpha: a2,
                beta: b2,
            }),
        ) = (s.params, run.params)
        else {
            panic!("{:?}", run.status)
        };
        // ±α give the same map
        assert!(
            (a1 * a1 - a2 * a2).norm() < 1e-8,
            "{} vs {}",
            a1 * a1,
            a2 * a2
        );
        assert!((b1 - b2).norm() < 1e-8);
    }

    #[test]
    fn sheet_labels() {
        let p = FamilyParams::Exp {
            lambda: c(0.0, TAU),
        };
        assert!((sheet_label(&p, c(1.0, 0.0), c(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(sheet_label(&p, c(0.0, 0.0), c(1.0, 0.0)).unwrap().abs() < 1e-15);
    }
}
