use serde::{Deserialize, Serialize};

use super::profile::LineProfile;
use crate::error::{domain, Error, Result};
use crate::linalg::{invert3, solve3, Mat3};
use crate::scalar::Real;

pub const MAX_ITERATIONS: usize = 200;
const REL_TOL: f64 = 1e-10;

/// Inclusive fit range in nm from the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow<T = f64> {
    pub x_min: T,
    pub x_max: T,
}

/// Result of fitting `y = i0·exp(−x/x_i) + baseline`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T = f64> {
    pub i0: T,
    pub x_i: T,
    pub baseline: T,
    pub sigma_x_i: T,
    pub sigma_i0: T,
    pub sigma_baseline: T,
    pub chi2_reduced: T,
    pub window: FitWindow<T>,
    pub n_points: usize,
    pub iterations: usize,
    /// Profile carried no usable sigmas and unit weights were used.
    pub unit_weights: bool,
}

/// Window from one pixel off the interface out to the first point whose
/// mean falls below `max(3·σ_tail, 1e-4)`, σ_tail being the scatter of the
/// last tenth of the profile.
pub fn default_window<T: Real>(profile: &LineProfile<T>) -> Result<FitWindow<T>> {
    let n = profile.len();
    if n < 6 {
        return Err(Error::InsufficientData(format!(
            "profile has {n} points, need at least 6"
        )));
    }
    let tail_len = (n / 10).max(5);
    let tail = &profile.y[n - tail_len..];
    let cnt = T::from_usize_lossy(tail_len);
    let mean = tail.iter().copied().sum::<T>() / cnt;
    let sd = (tail.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (cnt - T::one())).sqrt();
    let threshold = (T::lit(3.0) * sd).max(T::lit(1e-4));

    let start = 1;
    let mut end = n - 1;
    if let Some(i) = (start..n).find(|&i| profile.y[i] < threshold) {
        end = i.saturating_sub(1);
    }
    // keep at least five points
    let end = end.max(start + 4).min(n - 1);
    Ok(FitWindow {
        x_min: profile.x_nm[start],
        x_max: profile.x_nm[end],
    })
}

struct Points<T> {
    x: Vec<T>,
    y: Vec<T>,
    w: Vec<T>,
}

fn model<T: Real>(p: &[T; 3], x: T) -> (T, [T; 3]) {
    let [i0, xi, _] = *p;
    let e = (-x / xi).exp();
    (i0 * e + p[2], [e, i0 * e * x / (xi * xi), T::one()])
}

fn chi2<T: Real>(pts: &Points<T>, p: &[T; 3]) -> T {
    pts.x
        .iter()
        .zip(&pts.y)
        .zip(&pts.w)
        .map(|((&x, &y), &w)| {
            let r = y - model(p, x).0;
            w * r * r
        })
        .sum()
}

fn normal_equations<T: Real>(pts: &Points<T>, p: &[T; 3]) -> (Mat3<T>, [T; 3]) {
    let mut a = [[T::zero(); 3]; 3];
    let mut g = [T::zero(); 3];
    for ((&x, &y), &w) in pts.x.iter().zip(&pts.y).zip(&pts.w) {
        let (f, j) = model(p, x);
        let r = y - f;
        for i in 0..3 {
            g[i] = g[i] + w * j[i] * r;
            for k in 0..3 {
                a[i][k] = a[i][k] + w * j[i] * j[k];
            }
        }
    }
    (a, g)
}

/// Weighted log-linear start on baseline-subtracted data.
fn initial_guess<T: Real>(pts: &Points<T>) -> Result<[T; 3]> {
    let n = pts.x.len();
    let tail_len = (n / 10).max(3).min(n);
    let b0 = pts.y[n - tail_len..].iter().copied().sum::<T>() / T::from_usize_lossy(tail_len);
    let usable: Vec<usize> = (0..n).filter(|&i| pts.y[i] > b0).collect();
    if usable.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} points above the baseline estimate, need at least 5",
            usable.len()
        )));
    }
    // ln(y − b) = ln i0 − x/x_i, weighted by (y − b)²·w
    let (mut sw, mut sx, mut sl, mut sxx, mut sxl) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for &i in &usable {
        let d = pts.y[i] - b0;
        let wi = d * d * pts.w[i];
        let l = d.ln();
        let x = pts.x[i];
        sw = sw + wi;
        sx = sx + wi * x;
        sl = sl + wi * l;
        sxx = sxx + wi * x * x;
        sxl = sxl + wi * x * l;
    }
    let det = sw * sxx - sx * sx;
    let span = pts.x[n - 1] - pts.x[0];
    let (slope, intercept) = if det > T::zero() {
        let slope = (sw * sxl - sx * sl) / det;
        (slope, (sl - slope * sx) / sw)
    } else {
        (T::zero(), T::zero())
    };
    let xi = if slope < T::zero() {
        -T::one() / slope
    } else {
        span / T::lit(3.0)
    };
    let i0 = if slope < T::zero() {
        intercept.exp()
    } else {
        (pts.y[usable[0]] - b0) * (pts.x[usable[0]] / xi).exp()
    };
    Ok([i0, xi, b0])
}

/// Levenberg-Marquardt fit of `y = i0·exp(−x/x_i) + baseline` with weights
/// 1/σ². Steps are accepted only when the weighted residual does not grow.
/// Converges once a step changes every parameter by less than 1e-10 relative.
pub fn fit_exponential<T: Real>(profile: &LineProfile<T>, window: FitWindow<T>) -> Result<DecayFit<T>> {
    if !(window.x_max > window.x_min) {
        return Err(domain(
            "window",
            format!("({}, {}) is empty", window.x_min, window.x_max),
        ));
    }
    let idx: Vec<usize> = (0..profile.len())
        .filter(|&i| profile.x_nm[i] >= window.x_min && profile.x_nm[i] <= window.x_max)
        .collect();
    if idx.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} points in window, need at least 5",
            idx.len()
        )));
    }
    let min_pos = idx
        .iter()
        .map(|&i| profile.sigma[i])
        .filter(|&s| s > T::zero())
        .fold(T::infinity(), |a, b| a.min(b));
    let unit_weights = !min_pos.is_finite();
    let pts = Points {
        x: idx.iter().map(|&i| profile.x_nm[i]).collect(),
        y: idx.iter().map(|&i| profile.y[i]).collect(),
        w: idx
            .iter()
            .map(|&i| {
                if unit_weights {
                    T::one()
                } else {
                    let s = if profile.sigma[i] > T::zero() {
                        profile.sigma[i]
                    } else {
                        min_pos
                    };
                    T::one() / (s * s)
                }
            })
            .collect(),
    };

    let mut p = initial_guess(&pts)?;
    let mut current = chi2(&pts, &p);
    let mut lambda = T::lit(1e-3);
    // f32 cannot resolve 1e-10 relative steps
    let tol = T::lit(REL_TOL).max(T::lit(16.0) * T::epsilon());
    let mut converged = false;
    let mut iterations = 0;

    'outer: for it in 1..=MAX_ITERATIONS {
        iterations = it;
        let (a, g) = normal_equations(&pts, &p);
        loop {
            let mut damped = a;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] = a[i][i] * (T::one() + lambda);
            }
            let Some(delta) = solve3(&damped, &g) else {
                lambda = lambda * T::lit(10.0);
                if lambda > T::lit(1e20) {
                    break 'outer;
                }
                continue;
            };
            let scale = [p[0].abs(), p[1].abs(), p[2].abs().max(p[0].abs())];
            let small = (0..3).all(|i| delta[i].abs() <= tol * scale[i]);
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            let trial_chi2 = if trial[1] > T::zero() {
                chi2(&pts, &trial)
            } else {
                T::infinity()
            };
            if trial_chi2 <= current {
                p = trial;
                current = trial_chi2;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                if small {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            if small {
                // no representable step lowers the residual any further
                converged = true;
                break 'outer;
            }
            lambda = lambda * T::lit(10.0);
            if lambda > T::lit(1e20) {
                break 'outer;
            }
        }
    }

    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            i0: p[0].to_f64_lossy(),
            x_i: p[1].to_f64_lossy(),
            baseline: p[2].to_f64_lossy(),
        });
    }
    if !(p[1] > T::zero()) {
        return Err(Error::ModelMismatch(format!("fitted x_i = {} is not positive", p[1])));
    }
    let dof = T::from_usize_lossy(pts.x.len() - 3);
    let chi2_reduced = current / dof;
    let (a, _) = normal_equations(&pts, &p);
    let cov = invert3(&a).ok_or_else(|| Error::ModelMismatch("singular information matrix at the optimum".into()))?;
    // with unit weights the noise level is unknown and is taken from the residual
    let var_scale = if unit_weights { chi2_reduced } else { T::one() };
    let sd = |i: usize| (cov[i][i] * var_scale).max(T::zero()).sqrt();
    Ok(DecayFit {
        i0: p[0],
        x_i: p[1],
        baseline: p[2],
        sigma_x_i: sd(1),
        sigma_i0: sd(0),
        sigma_baseline: sd(2),
        chi2_reduced,
        window,
        n_points: pts.x.len(),
        iterations,
        unit_weights,
    })
}
