//! Box-constrained local minimization by projected quasi-Newton steps.
//!
//! Used both for hyperparameter fitting (in log space) and for refining
//! acquisition maxima inside the unit box. The objective returns its value
//! together with a gradient; a non-finite value marks an infeasible point and
//! makes the line search back off.

#[derive(Debug, Clone, Copy)]
pub struct LocalOptions {
    pub max_iters: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub gtol: f64,
    /// Stop when the relative decrease of the objective falls below this.
    pub ftol: f64,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions { max_iters: 100, gtol: 1e-8, ftol: 1e-12 }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` over the box `[lower, upper]` starting from `x0`.
///
/// The returned value is never worse than the value at the projected start.
pub fn minimize_box<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: LocalOptions) -> LocalResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return LocalResult { x, value: fx, iterations: 0 };
    }

    // Inverse Hessian approximation, row-major.
    let mut h = identity(n);
    let mut iterations = 0;

    for it in 0..opts.max_iters {
        iterations = it + 1;
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let pg_norm = (0..n).filter(|&i| free[i]).map(|i| g[i].abs()).fold(0.0, f64::max);
        if pg_norm < opts.gtol {
            break;
        }

        let mut d = vec![0.0; n];
        for i in 0..n {
            if free[i] {
                d[i] = -(0..n).filter(|&j| free[j]).map(|j| h[i * n + j] * g[j]).sum::<f64>();
            }
        }
        if dot(&d, &g) >= 0.0 {
            h = identity(n);
            for i in 0..n {
                d[i] = if free[i] { -g[i] } else { 0.0 };
            }
        }

        // Scale the first steepest-descent step to something box-sized.
        let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let span = (0..n).map(|i| upper[i] - lower[i]).fold(0.0_f64, f64::max);
        let mut t = if it == 0 && dmax > 0.0 { (0.25 * span / dmax).min(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..40 {
            let mut xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            project(&mut xt, lower, upper);
            let step: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if step.iter().all(|s| *s == 0.0) {
                break;
            }
            let (ft, gt) = f(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * decrease {
                accepted = Some((xt, ft, gt, step));
                break;
            }
            t *= 0.5;
        }

        let Some((xt, ft, gt, s)) = accepted else { break };
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            bfgs_update(&mut h, &s, &y, sy);
        }
        let rel = (fx - ft).abs() / (1.0 + fx.abs());
        x = xt;
        fx = ft;
        g = gt;
        if rel < opts.ftol {
            break;
        }
    }

    LocalResult { x, value: fx, iterations }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
        }
    }
}

/// Central finite-difference gradient, for objectives without an analytic one.
pub fn fd_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (v, g)
    }

    #[test]
    fn finds_interior_minimum() {
        let opts = LocalOptions { max_iters: 500, ..Default::default() };
        let r = minimize_box(rosenbrock, &[-1.2, 1.0], &[-2.0, -2.0], &[2.0, 2.0], opts);
        assert!((r.x[0] - 1.0).abs() < 1e-4, "{:?}", r);
        assert!((r.x[1] - 1.0).abs() < 1e-4, "{:?}", r);
    }

    #[test]
    fn respects_active_bound() {
        // Unconstrained minimum at (2, -3); the box clips both coordinates.
        let f = |x: &[f64]| {
            let v = (x[0] - 2.0).powi(2) + (x[1] + 3.0).powi(2);
            (v, vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] + 3.0)])
        };
        let r = minimize_box(f, &[0.5, 0.5], &[0.0, 0.0], &[1.0, 1.0], LocalOptions::default());
        assert_eq!(r.x, vec![1.0, 0.0]);
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| ((x[0] * 7.0).sin() + x[0], vec![7.0 * (x[0] * 7.0).cos() + 1.0]);
        for k in 0..20 {
            let x0 = k as f64 / 19.0;
            let r = minimize_box(f, &[x0], &[0.0], &[1.0], LocalOptions::default());
            assert!(r.value <= f(&[x0]).0 + 1e-15);
        }
    }
}
