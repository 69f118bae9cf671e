//! Adaptive cubature over the whole plane for integrands with isolated
//! singularities no worse than `1/|z − s|` and `O(|z|⁻³)` decay.
//!
//! The plane is split by a partition of unity `w_j ∝ |z − s_j|⁻⁴` over the
//! singular points. Each piece is integrated in log-polar coordinates
//! `z = s_j + e^{t + iθ}` by tensor Gauss–Kronrod 7/15 with global adaptive
//! refinement. The disk of radius `r₀` around each centre and the region
//! beyond the far radius are added from the decay rate of the boundary
//! integrals.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes on `[−1, 1]` with Kronrod and (zero off the Gauss subset) Gauss weights.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..8 {
        let g = if i % 2 == 1 {
            WG[i / 2]
        } else if i == 7 {
            WG[3]
        } else {
            0.0
        };
        out[i] = (-XGK[i], WGK[i], g);
        out[14 - i] = (XGK[i], WGK[i], g);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    /// Absolute error that is always acceptable.
    pub abs_tol: f64,
    /// Inner cut-off radius, relative to the smallest centre separation (capped at 1).
    pub exclusion_radius: f64,
    /// Outer cut-off radius, relative to `max(1, max |s_j|)`.
    pub far_radius: f64,
    pub max_evals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_tol: 0.0,
            exclusion_radius: 1e-4,
            far_radius: 1e4,
            max_evals: 4_000_000,
        }
    }
}

/// An integral value with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
struct Rect<const N: usize> {
    center: usize,
    t: (f64, f64),
    th: (f64, f64),
    value: [f64; N],
    error: [f64; N],
    /// Error attributable to the `t` direction versus `θ`.
    split_t: bool,
}

struct Piece<'a, F> {
    f: &'a F,
    centers: &'a [Complex64],
}

impl<F, const N: usize> Piece<'_, F>
where
    F: Fn(Complex64) -> Result<[f64; N]> + Sync,
{
    /// Log-polar integrand of centre `j`: `e^{2t} f(z) w_j(z)`.
    fn eval(&self, j: usize, t: f64, th: f64) -> Result<[f64; N]> {
        let s = self.centers[j];
        let rho = t.exp();
        let z = s + Complex64::from_polar(rho, th);
        let dj = rho * rho;
        let mut denom = 0.0;
        for (k, &sk) in self.centers.iter().enumerate() {
            let q = if k == j {
                1.0
            } else {
                dj / (z - sk).norm_sqr()
            };
            denom += q * q;
        }
        let w = 1.0 / denom;
        let v = (self.f)(z)?;
        let mut out = [0.0; N];
        for c in 0..N {
            if !v[c].is_finite() {
                return Err(Error::Other(format!("integrand is not finite at {z}")));
            }
            out[c] = v[c] * w * dj;
        }
        Ok(out)
    }

    fn rect(&self, j: usize, t: (f64, f64), th: (f64, f64)) -> Result<Rect<N>> {
        let r = rule();
        let (ht, hth) = (0.5 * (t.1 - t.0), 0.5 * (th.1 - th.0));
        let (mt, mth) = (0.5 * (t.1 + t.0), 0.5 * (th.1 + th.0));
        let mut kk = [0.0; N];
        let mut gg = [0.0; N];
        let mut gk = [0.0; N];
        let mut kg = [0.0; N];
        for &(xt, wkt, wgt) in &r {
            for &(xth, wkth, wgth) in &r {
                let v = self.eval(j, mt + ht * xt, mth + hth * xth)?;
                for c in 0..N {
                    kk[c] += wkt * wkth * v[c];
                    gg[c] += wgt * wgth * v[c];
                    gk[c] += wgt * wkth * v[c];
                    kg[c] += wkt * wgth * v[c];
                }
            }
        }
        let area = ht * hth;
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        let (mut et, mut eth) = (0.0, 0.0);
        for c in 0..N {
            value[c] = kk[c] * area;
            error[c] = ((kk[c] - gg[c]) * area).abs();
            et += ((kk[c] - gk[c]) * area).abs();
            eth += ((kk[c] - kg[c]) * area).abs();
        }
        Ok(Rect {
            center: j,
            t,
            th,
            value,
            error,
            split_t: et >= eth,
        })
    }

    /// `∫ h(t, θ) dθ` over the full circle by composite Kronrod.
    fn ring(&self, j: usize, t: f64) -> Result<[f64; N]> {
        let r = rule();
        let pieces = 8;
        let h = 0.5 * TAU / pieces as f64;
        let mut out = [0.0; N];
        for p in 0..pieces {
            let mid = (2 * p + 1) as f64 * h;
            for &(x, wk, _) in &r {
                let v = self.eval(j, t, mid + h * x)?;
                for c in 0..N {
                    out[c] += wk * h * v[c];
                }
            }
        }
        Ok(out)
    }
}

/// Tail beyond a boundary where the ring integral `G` decays exponentially
/// away from the integration range; `g[i]` is `G` at distance `i·h` inside.
fn tail(g: [f64; 3], h: f64) -> (f64, f64) {
    if g[0] <= 0.0 {
        return (0.0, 0.0);
    }
    let rate = |gi: f64, d: f64| {
        if gi > g[0] {
            ((gi / g[0]).ln() / d).clamp(0.2, 5.0)
        } else {
            5.0
        }
    };
    let (v1, v2) = (g[0] / rate(g[1], h), g[0] / rate(g[2], 2.0 * h));
    (v1, (v1 - v2).abs() + 1e-3 * v1)
}

/// `∫_ℂ f dA` for each component of `f`.
pub fn plane_integral<F, const N: usize>(
    f: &F,
    singular: &[Complex64],
    settings: &QuadSettings,
) -> Result<[Estimate; N]>
where
    F: Fn(Complex64) -> Result<[f64; N]> + Sync,
{
    let mut centers: Vec<Complex64> = Vec::new();
    for &s in singular {
        if s.re.is_finite()
            && s.im.is_finite()
            && !centers
                .iter()
                .any(|c| (c - s).norm() <= 1e-12 * s.norm().max(1.0))
        {
            centers.push(s);
        }
    }
    if centers.is_empty() {
        centers.push(Complex64::new(0.0, 0.0));
    }
    let mut gap = f64::INFINITY;
    for i in 0..centers.len() {
        for k in i + 1..centers.len() {
            gap = gap.min((centers[i] - centers[k]).norm());
        }
    }
    let r0 = settings.exclusion_radius * gap.min(1.0);
    let big = centers.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let r1 = settings.far_radius * big;
    let (t0, t1) = (r0.ln(), r1.ln());

    let piece = Piece {
        f,
        centers: &centers,
    };
    let t_cells = ((t1 - t0) / 2.0).ceil().max(1.0) as usize;
    let th_cells = 4;
    let mut jobs = Vec::new();
    for j in 0..centers.len() {
        for a in 0..t_cells {
            for b in 0..th_cells {
                let ta = t0 + (t1 - t0) * a as f64 / t_cells as f64;
                let tb = t0 + (t1 - t0) * (a + 1) as f64 / t_cells as f64;
                let tha = TAU * b as f64 / th_cells as f64;
                let thb = TAU * (b + 1) as f64 / th_cells as f64;
                jobs.push((j, (ta, tb), (tha, thb)));
            }
        }
    }
    let mut rects: Vec<Rect<N>> = jobs
        .par_iter()
        .map(|&(j, t, th)| piece.rect(j, t, th))
        .collect::<Result<_>>()?;
    let mut evals = rects.len() * 225;

    // boundary tails, inner and outer, per centre
    let h = 0.25;
    let mut tail_value = [0.0; N];
    let mut tail_error = [0.0; N];
    for j in 0..centers.len() {
        let inner = [
            piece.ring(j, t0)?,
            piece.ring(j, t0 + h)?,
            piece.ring(j, t0 + 2.0 * h)?,
        ];
        let outer = [
            piece.ring(j, t1)?,
            piece.ring(j, t1 - h)?,
            piece.ring(j, t1 - 2.0 * h)?,
        ];
        evals += 6 * 120;
        for c in 0..N {
            for g in [&inner, &outer] {
                let (v, e) = tail([g[0][c], g[1][c], g[2][c]], h);
                tail_value[c] += v;
                tail_error[c] += e;
            }
        }
    }

    loop {
        let mut total = tail_value;
        let mut err = tail_error;
        for r in &rects {
            for c in 0..N {
                total[c] += r.value[c];
                err[c] += r.error[c];
            }
        }
        let target: Vec<f64> = (0..N)
            .map(|c| (settings.rel_tol * total[c].abs()).max(settings.abs_tol))
            .collect();
        if (0..N).all(|c| err[c] <= target[c]) {
            let mut out = [Estimate {
                value: 0.0,
                error: 0.0,
            }; N];
            for c in 0..N {
                out[c] = Estimate {
                    value: total[c],
                    error: err[c],
                };
            }
            return Ok(out);
        }
        if evals > settings.max_evals {
            let achieved = (0..N)
                .map(|c| err[c] / total[c].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            return Err(Error::Quadrature {
                target: settings.rel_tol,
                achieved,
            });
        }
        let score = |r: &Rect<N>| {
            (0..N)
                .map(|c| r.error[c] / target[c].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let mut order: Vec<usize> = (0..rects.len()).collect();
        order.sort_by(|&a, &b| {
            score(&rects[b])
                .total_cmp(&score(&rects[a]))
                .then(a.cmp(&b))
        });
        let batch = (rects.len() / 16).clamp(1, 32);
        let mut chosen: Vec<usize> = order[..batch.min(order.len())].to_vec();
        chosen.sort_unstable();
        let mut children = Vec::with_capacity(2 * chosen.len());
        for &i in &chosen {
            let r = &rects[i];
            if r.split_t {
                let m = 0.5 * (r.t.0 + r.t.1);
                children.push((r.center, (r.t.0, m), r.th));
                children.push((r.center, (m, r.t.1), r.th));
            } else {
                let m = 0.5 * (r.th.0 + r.th.1);
                children.push((r.center, r.t, (r.th.0, m)));
                children.push((r.center, r.t, (m, r.th.1)));
            }
        }
        let new: Vec<Rect<N>> = children
            .par_iter()
            .map(|&(j, t, th)| piece.rect(j, t, th))
            .collect::<Result<_>>()?;
        evals += new.len() * 225;
        for &i in chosen.iter().rev() {
            rects.swap_remove(i);
        }
        rects.extend(new);
        // keep a canonical order so the accumulation is reproducible
        rects.sort_by(|a, b| {
            a.center
                .cmp(&b.center)
                .then(a.t.0.total_cmp(&b.t.0))
                .then(a.th.0.total_cmp(&b.th.0))
        });
    }
}
