//! Orbit portraits: preperiod, period, successor map, branch integers and the
//! winding number, plus the slot layout that places orbit points in a
//! [`MarkedConfiguration`](crate::pullback::MarkedConfiguration).
//!
//! Orbit indexing. For `exp` and `av2` the orbit of the omitted value `0` is
//! `c_0 = 0, c_1 = 1, …, c_{k1+l}`. For `pexp` it is the orbit of the critical
//! point: `c_0 = −p/λ, c_1 = 1, …`; the point `0` is marked separately. When the
//! critical point is periodic the portrait uses `k1 = 0` and `c_0` is the same
//! point as `c_l`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyParams, FamilySpec};
use crate::pullback::MarkedConfiguration;
use crate::sphere::{principal_log, ExtendedComplex, Finite};

/// Hypothesis on the critical orbit of a `pexp` portrait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriticalCase {
    PeriodicC,
    NonperiodicCAndFc,
}

/// Orbit of the second asymptotic value of an `av2` map: `c'_0 = λ, c'_1, …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondOrbit {
    pub k1: usize,
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub succ: Option<Vec<usize>>,
    pub branch: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPortrait {
    pub family: FamilySpec,
    pub k1: usize,
    pub l: usize,
    /// Explicit successor map on orbit indices; the standard one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub succ: Option<Vec<usize>>,
    /// Sheet used to pull `c_{succ(k)}` back to `c_k`, one entry per orbit index.
    pub branch: Vec<i64>,
    pub eta: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_case: Option<CriticalCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_orbit: Option<SecondOrbit>,
    /// Starting `λ` for `pexp`; defaults to `−p` over the initial critical position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_lambda: Option<Complex64>,
}

fn standard_succ(k1: usize, l: usize, k: usize) -> usize {
    if k < k1 + l {
        k + 1
    } else {
        k1 + 1
    }
}

fn check_orbit(
    name: &str,
    k1: usize,
    l: usize,
    succ: Option<&[usize]>,
    branch_len: usize,
    out: &mut Vec<String>,
) {
    if l == 0 {
        out.push(format!("{name}: period must be at least 1"));
        return;
    }
    let n = k1 + l + 1;
    if branch_len != n {
        out.push(format!(
            "{name}: branch list has {branch_len} entries, expected {n}"
        ));
    }
    let Some(succ) = succ else { return };
    if succ.len() != n {
        out.push(format!(
            "{name}: successor map has {} entries, expected {n}",
            succ.len()
        ));
        return;
    }
    for (k, &s) in succ.iter().enumerate() {
        if s >= n {
            out.push(format!("{name}: successor of {k} is out of range ({s})"));
        } else if k == k1 + l {
            if s != k1 + 1 {
                out.push(format!(
                    "{name}: broken cycle (succ({k}) = {s}, expected {})",
                    k1 + 1
                ));
            }
        } else if s != k + 1 {
            out.push(format!(
                "{name}: successor mismatch at {k} ({s}, expected {})",
                k + 1
            ));
        }
    }
    if succ.contains(&0) {
        out.push(format!(
            "{name}: index 0 is an omitted value and cannot lie on a cycle"
        ));
    }
}

impl OrbitPortrait {
    /// Fixed-point exponential portrait `0 → 1 → 1` realized by `e^{2πiηz}`.
    pub fn exp_fixed(eta: i64) -> Self {
        Self {
            family: FamilySpec::Exp,
            k1: 0,
            l: 1,
            succ: None,
            branch: vec![0, eta],
            eta,
            critical_case: None,
            second_orbit: None,
            seed_lambda: None,
        }
    }

    /// `pexp` portrait whose critical point is fixed, forcing `λ = −p`.
    pub fn pexp_fixed_critical(p: u32) -> Self {
        Self {
            family: FamilySpec::Pexp { p },
            k1: 0,
            l: 1,
            succ: None,
            branch: vec![0, 0],
            eta: 0,
            critical_case: Some(CriticalCase::PeriodicC),
            second_orbit: None,
            seed_lambda: None,
        }
    }

    /// `k2 = k1 + l`, the other preimage of `c_{k1+1}` on the orbit.
    pub fn k2(&self) -> usize {
        self.k1 + self.l
    }

    /// Number of orbit indices `k1 + l + 1`.
    pub fn orbit_len(&self) -> usize {
        self.k1 + self.l + 1
    }

    pub fn is_periodic_critical(&self) -> bool {
        match self.family {
            FamilySpec::Pexp { .. } => match self.critical_case {
                Some(CriticalCase::PeriodicC) => true,
                Some(CriticalCase::NonperiodicCAndFc) => false,
                None => self.k1 == 0,
            },
            _ => false,
        }
    }

    /// Index of `f(c_k)` on the orbit.
    pub fn successor(&self, k: usize) -> Result<usize> {
        if k >= self.orbit_len() {
            return Err(Error::IndexOutOfRange(k));
        }
        Ok(match &self.succ {
            Some(s) => *s.get(k).ok_or(Error::IndexOutOfRange(k))?,
            None => standard_succ(self.k1, self.l, k),
        })
    }

    /// Every violated hypothesis; empty when the portrait is usable.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.family.validate() {
            out.push(e.to_string());
        }
        check_orbit(
            "orbit",
            self.k1,
            self.l,
            self.succ.as_deref(),
            self.branch.len(),
            &mut out,
        );
        if !out.is_empty() {
            return out;
        }
        let (k1, k2) = (self.k1, self.k2());
        let diff = self.branch[k2] - self.branch[k1];
        match self.family {
            FamilySpec::Exp | FamilySpec::Av2 => {
                if self.branch[0] != 0 {
                    out.push("branch[0] must be 0 since 0 is the sheet-0 preimage of 1".into());
                }
                if self.eta == 0 {
                    out.push("eta must be nonzero (c_k1 and c_k2 would coincide)".into());
                }
                if self.eta != diff {
                    out.push(format!(
                        "eta {} differs from branch[k2] - branch[k1] = {diff}",
                        self.eta
                    ));
                }
                if self.critical_case.is_some() {
                    out.push("critical_case only applies to pexp".into());
                }
            }
            FamilySpec::Pexp { p } => {
                if self.is_periodic_critical() {
                    if self.k1 != 0 {
                        out.push("periodic critical point requires k1 = 0".into());
                    }
                    if self.eta != 0 {
                        out.push("periodic critical point requires eta = 0".into());
                    }
                    if self.branch[0] != 0 || self.branch[self.l] != 0 {
                        out.push("branch entries of the critical point must be 0".into());
                    }
                } else {
                    if self.k1 == 0 {
                        out.push("c nonperiodic but f(c) periodic".into());
                    }
                    if self.branch[0] != 0 {
                        out.push("branch entry of the critical point must be 0".into());
                    }
                    if (self.eta - diff).rem_euclid(p as i64) != 0 {
                        out.push(format!(
                            "eta {} is not congruent to branch[k2] - branch[k1] = {diff} mod {p}",
                            self.eta
                        ));
                    }
                }
            }
        }
        match (self.family, &self.second_orbit) {
            (FamilySpec::Av2, None) => out.push("av2 portrait needs a second_orbit".into()),
            (FamilySpec::Av2, Some(s)) => {
                check_orbit(
                    "second_orbit",
                    s.k1,
                    s.l,
                    s.succ.as_deref(),
                    s.branch.len(),
                    &mut out,
                );
                // c'_{k1} and c'_{k1+l} share an image, so they need distinct sheets
                if s.branch.len() == s.k1 + s.l + 1
                    && s.l > 0
                    && s.branch[s.k1] == s.branch[s.k1 + s.l]
                {
                    out.push(format!(
                        "second_orbit: indices {} and {} map to the same point on the same sheet",
                        s.k1,
                        s.k1 + s.l
                    ));
                }
            }
            (_, Some(_)) => out.push("second_orbit only applies to av2".into()),
            _ => {}
        }
        if let Some(l) = self.seed_lambda {
            if !matches!(self.family, FamilySpec::Pexp { .. }) {
                out.push("seed_lambda only applies to pexp".into());
            } else if !(l.norm() > 0.0 && l.re.is_finite() && l.im.is_finite()) {
                out.push("seed_lambda must be finite and nonzero".into());
            }
        }
        out
    }

    /// Slot layout of the marked set.
    pub fn layout(&self) -> Layout {
        Layout::new(self)
    }
}

/// One pulled-back point: `slot` at level `n+1` is a preimage of `image` at
/// level `n` on sheet `branch`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pull {
    pub slot: usize,
    pub image: usize,
    pub branch: i64,
}

/// Where every orbit point lives in a configuration vector.
///
/// * `exp`: `c_0..c_{k1+l}` in slots `0..=k1+l`, then `∞`.
/// * `pexp`: `0` in slot 0, `c_1..c_{k1+l}` in slots `1..=k1+l`, the critical point
///   in slot `k1+l+1` (or aliased to slot `l` when periodic), then `∞`.
/// * `av2`: first orbit in slots `0..=k1+l`, then the second orbit, then `∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub len: usize,
    /// Orbit index to slot.
    pub orbit: Vec<usize>,
    /// Second orbit index to slot (`av2`).
    pub second: Vec<usize>,
    pub zero: usize,
    pub one: usize,
    pub infinity: usize,
    pub critical: Option<usize>,
    pub asymptotic2: Option<usize>,
    /// Points recomputed by inverse branches at each step, pinned ones included.
    pub pulls: Vec<Pull>,
}

impl Layout {
    fn new(port: &OrbitPortrait) -> Self {
        let n = port.orbit_len();
        let succ = |k: usize| {
            port.successor(k)
                .unwrap_or_else(|_| standard_succ(port.k1, port.l, k))
        };
        match port.family {
            FamilySpec::Exp => {
                let orbit: Vec<usize> = (0..n).collect();
                let pulls = (0..n)
                    .map(|k| Pull {
                        slot: k,
                        image: succ(k),
                        branch: port.branch[k],
                    })
                    .collect();
                Layout {
                    len: n + 1,
                    orbit,
                    second: vec![],
                    zero: 0,
                    one: 1,
                    infinity: n,
                    critical: None,
                    asymptotic2: None,
                    pulls,
                }
            }
            FamilySpec::Pexp { .. } => {
                let periodic = port.is_periodic_critical();
                let critical = if periodic { port.l } else { n };
                let mut orbit: Vec<usize> = (0..n).collect();
                orbit[0] = critical;
                let len = if periodic { n + 1 } else { n + 2 };
                let pulls = (1..n)
                    .filter(|&k| orbit[k] != critical)
                    .map(|k| Pull {
                        slot: orbit[k],
                        image: orbit[succ(k)],
                        branch: port.branch[k],
                    })
                    .collect();
                Layout {
                    len,
                    orbit,
                    second: vec![],
                    zero: 0,
                    one: 1,
                    infinity: len - 1,
                    critical: Some(critical),
                    asymptotic2: None,
                    pulls,
                }
            }
            FamilySpec::Av2 => {
                let orbit: Vec<usize> = (0..n).collect();
                let mut pulls: Vec<Pull> = (0..n)
                    .map(|k| Pull {
                        slot: k,
                        image: succ(k),
                        branch: port.branch[k],
                    })
                    .collect();
                let mut second = Vec::new();
                if let Some(s) = &port.second_orbit {
                    let m = s.k1 + s.l + 1;
                    second = (n..n + m).collect();
                    for k in 0..m {
                        let sk = match &s.succ {
                            Some(v) => v
                                .get(k)
                                .copied()
                                .unwrap_or_else(|| standard_succ(s.k1, s.l, k)),
                            None => standard_succ(s.k1, s.l, k),
                        };
                        pulls.push(Pull {
                            slot: second[k],
                            image: second[sk.min(m - 1)],
                            branch: s.branch.get(k).copied().unwrap_or(0),
                        });
                    }
                }
                let len = n + second.len() + 1;
                Layout {
                    len,
                    asymptotic2: second.first().copied(),
                    orbit,
                    second,
                    zero: 0,
                    one: 1,
                    infinity: len - 1,
                    critical: None,
                    pulls,
                }
            }
        }
    }

    pub fn pinned(&self) -> [usize; 3] {
        [self.zero, self.one, self.infinity]
    }

    pub fn is_pinned(&self, slot: usize) -> bool {
        slot == self.zero || slot == self.one || slot == self.infinity
    }

    /// Free slots in slot order.
    pub fn free(&self) -> Vec<usize> {
        (0..self.len).filter(|&s| !self.is_pinned(s)).collect()
    }
}

/// Samples per segment of the contour for the `pexp` log integral.
const GAMMA_SAMPLES: usize = 64;

/// The canonical curve from `a` to `b`: the straight segment, or a two-segment
/// detour through the midpoint pushed sideways by `0.1|b − a|` when the segment
/// comes within `1e−8` of an obstacle.
pub fn gamma_path(a: Complex64, b: Complex64, obstacles: &[Complex64]) -> Vec<Complex64> {
    let d = b - a;
    let hits = obstacles.iter().any(|&o| {
        if (o - a).norm() == 0.0 || (o - b).norm() == 0.0 {
            return false;
        }
        let t = ((o - a) * d.conj()).re / d.norm_sqr();
        let t = t.clamp(0.0, 1.0);
        (a + d * t - o).norm() < 1e-8
    });
    let seg = |p: Complex64, q: Complex64, out: &mut Vec<Complex64>| {
        for j in 1..=GAMMA_SAMPLES {
            out.push(p + (q - p) * (j as f64 / GAMMA_SAMPLES as f64));
        }
    };
    let mut pts = vec![a];
    if hits {
        let mid = (a + b) / 2.0 + Complex64::new(0.0, 1.0) * d * 0.1;
        seg(a, mid, &mut pts);
        seg(mid, b, &mut pts);
    } else {
        seg(a, b, &mut pts);
    }
    pts
}

/// Change of a continuous logarithm along a polyline avoiding 0.
pub fn log_increment(path: &[Complex64]) -> Complex64 {
    path.windows(2).map(|w| principal_log(w[1] / w[0])).sum()
}

/// Complex-analytic winding value of `δ = f(γ)` about `0`, computed from the
/// level-`n+1` endpoints `c_k1`, `c_k2` and the step's parameters.
///
/// * `exp`: `λ(c_k2 − c_k1)/(2πi)`; `av2`: the same with `β`.
/// * `pexp`: `(p ∫_γ dz/z + λ Δc)/(2πi)`; `0` when the critical point is periodic.
pub fn winding_number(
    port: &OrbitPortrait,
    config: &MarkedConfiguration,
    params: &FamilyParams,
) -> Result<Complex64> {
    let layout = port.layout();
    if port.is_periodic_critical() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let get = |k: usize| -> Result<Complex64> {
        let slot = layout.orbit[k];
        match config.positions.get(slot).map(|p| p.normalized()) {
            Some(Finite(z)) => Ok(z),
            _ => Err(Error::WindingEndpoints(format!(
                "c_{k} is not a finite point"
            ))),
        }
    };
    let a = get(port.k1)?;
    let b = get(port.k2())?;
    if (b - a).norm() == 0.0 {
        return Err(Error::WindingEndpoints("c_k1 and c_k2 coincide".into()));
    }
    let two_pi_i = Complex64::new(0.0, TAU);
    match *params {
        FamilyParams::Exp { lambda } => Ok(lambda * (b - a) / two_pi_i),
        FamilyParams::Av2 { beta, .. } => Ok(beta * (b - a) / two_pi_i),
        FamilyParams::Pexp { p, lambda } => {
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return Err(Error::WindingEndpoints("endpoint at 0".into()));
            }
            let mut obstacles = vec![Complex64::new(0.0, 0.0)];
            obstacles.extend(
                config
                    .positions
                    .iter()
                    .filter_map(ExtendedComplex::finite)
                    .filter(|&z| z != a && z != b),
            );
            let path = gamma_path(a, b, &obstacles);
            Ok((log_increment(&path) * p as f64 + lambda * (b - a)) / two_pi_i)
        }
    }
}
