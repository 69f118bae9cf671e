//! Damped Newton iterations in one and several complex variables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Controls for the damped Newton solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    /// Largest modulus of a single step.
    pub step_cap: f64,
    pub max_iter: usize,
    /// Converged once the residual modulus drops below this.
    pub residual_tol: f64,
    /// Number of perturbed restarts on a circle around the seed.
    pub restarts: usize,
    pub restart_radius: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            step_cap: 10.0,
            max_iter: 100,
            residual_tol: 1e-13,
            restarts: 8,
            restart_radius: 0.1,
        }
    }
}

/// Damped Newton for `f(z) = 0`.
///
/// `eval(z, state)` returns `(f, f')` and a state carried along the path;
/// `advance(state, z_old, z_new)` updates the state when a step is accepted.
/// The state is how sheet-continuity of logarithms is held along the path.
pub(crate) fn solve_scalar<S: Copy>(
    seed: Complex64,
    init: S,
    settings: &NewtonSettings,
    eval: impl Fn(Complex64, S) -> Option<(Complex64, Complex64)>,
    advance: impl Fn(S, Complex64, Complex64) -> S,
) -> Option<Complex64> {
    let mut z = seed;
    let mut state = init;
    let (mut f, mut df) = eval(z, state)?;
    let mut prev_step: Option<f64> = None;
    let mut prev_ratio = 0.0;
    let mut polish = 0;
    for _ in 0..settings.max_iter {
        let res = f.norm();
        if !res.is_finite() {
            return None;
        }
        if res < settings.residual_tol {
            // a couple of extra steps recover digits lost to a small derivative
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        if df.norm() == 0.0 {
            break;
        }
        let mut step = f / df;
        // two successive step ratios near 1/2 signal a double root
        if let Some(p) = prev_step {
            let ratio = step.norm() / p;
            if (0.45..0.55).contains(&ratio) && (0.45..0.55).contains(&prev_ratio) {
                step *= 2.0;
                prev_ratio = 0.0;
            } else {
                prev_ratio = ratio;
            }
        }
        if step.norm() > settings.step_cap {
            step *= settings.step_cap / step.norm();
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = z - step * t;
            let st = advance(state, z, cand);
            if let Some((fc, dfc)) = eval(cand, st) {
                let rc = fc.norm();
                if rc.is_finite() && (rc < res || rc < settings.residual_tol) {
                    prev_step = Some((step * t).norm());
                    z = cand;
                    state = st;
                    f = fc;
                    df = dfc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if (step * t).norm() <= 1e-16 * z.norm().max(1.0) && res < settings.residual_tol {
            break;
        }
    }
    let residual = f.norm();
    (residual < settings.residual_tol).then_some(z)
}

/// Solves the dense complex system `a x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear(
    mut a: Vec<Vec<Complex64>>,
    mut b: Vec<Complex64>,
) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() == 0.0 || !a[pivot][col].norm().is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter()
        .all(|v| v.re.is_finite() && v.im.is_finite())
        .then_some(x)
}

/// Damped multivariate Newton on `F(u) = 0` with an analytic Jacobian.
pub(crate) fn solve_system(
    start: Vec<Complex64>,
    settings: &NewtonSettings,
    eval: impl Fn(&[Complex64]) -> Option<(Vec<Complex64>, Vec<Vec<Complex64>>)>,
) -> Option<(Vec<Complex64>, f64)> {
    let norm_inf = |v: &[Complex64]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut u = start;
    let (mut f, mut jac) = eval(&u)?;
    let mut polish = 0;
    for _ in 0..settings.max_iter {
        let res = norm_inf(&f);
        if !res.is_finite() {
            return None;
        }
        if res < settings.residual_tol {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let mut step = solve_linear(jac.clone(), f.clone())?;
        let size = norm_inf(&step);
        if size > settings.step_cap {
            for s in &mut step {
                *s *= settings.step_cap / size;
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<Complex64> = u.iter().zip(&step).map(|(x, s)| x - s * t).collect();
            if let Some((fc, jc)) = eval(&cand) {
                let rc = norm_inf(&fc);
                if rc.is_finite() && (rc < res || rc < settings.residual_tol) {
                    u = cand;
                    f = fc;
                    jac = jc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let res = norm_inf(&f);
    (res < settings.residual_tol).then_some((u, res))
}
