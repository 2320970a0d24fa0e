//! Derivative-free Nelder–Mead minimisation with restarts.
//!
//! Reflection, expansion, contraction and shrink coefficients depend on the
//! number of parameters.
//!
//! A run stalls when the best value improves by less than `value_tol` over
//! [`STALL_WINDOW`] consecutive iterations. After a stall the simplex is
//! rebuilt around the best point; the search has converged when a whole
//! restarted run fails to improve on the previous best by `value_tol`.

/// Iterations without meaningful best-value improvement that end a run.
pub const STALL_WINDOW: usize = 50;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iters: usize,
    pub value_tol: f64,
    /// Edge length of the initial (and restart) simplex.
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimise `f` from `x0`. Non-finite objective values are treated as `+∞`.
pub fn minimize<F>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0);
    let mut used = 0usize;
    let mut step = opts.initial_step;
    let mut first = true;

    while used < opts.max_iters {
        let (x, v, iters) = run(&eval, &best_x, best_v, step, opts.value_tol, opts.max_iters - used);
        used += iters;
        let improvement = best_v - v;
        if v < best_v {
            best_x = x;
            best_v = v;
        }
        if !first && !(improvement >= opts.value_tol) {
            return SimplexResult {
                x: best_x,
                value: best_v,
                iterations: used,
                converged: true,
            };
        }
        first = false;
        // Shrink restarts so later runs polish rather than re-explore.
        step = (step * 0.5).max(1e-4);
    }
    SimplexResult {
        x: best_x,
        value: best_v,
        iterations: used,
        converged: false,
    }
}

/// One Nelder–Mead run until stall or budget exhaustion.
fn run<F>(f: &F, x0: &[f64], v0: f64, step: f64, tol: f64, budget: usize) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(v0);
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-8 { step * p[i].abs().max(1.0) } else { step };
        vals.push(f(&p));
        pts.push(p);
    }

    let mut iters = 0;
    let mut last_best = f64::INFINITY;
    let mut since_improve = 0;
    let mut order: Vec<usize> = (0..=n).collect();

    while iters < budget {
        iters += 1;
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if last_best - vals[best] >= tol {
            since_improve = 0;
        } else {
            since_improve += 1;
            if since_improve >= STALL_WINDOW {
                break;
            }
        }
        last_best = last_best.min(vals[best]);

        let mut centroid = vec![0.0; n];
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[idx]) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let vr = f(&xr);
        if vr < vals[best] {
            let xe = along(alpha * beta);
            let ve = f(&xe);
            if ve < vr {
                pts[worst] = xe;
                vals[worst] = ve;
            } else {
                pts[worst] = xr;
                vals[worst] = vr;
            }
            continue;
        }
        if vr < vals[second_worst] {
            pts[worst] = xr;
            vals[worst] = vr;
            continue;
        }
        let (xc, vc, accept) = if vr < vals[worst] {
            let xc = along(alpha * gamma);
            let vc = f(&xc);
            let ok = vc <= vr;
            (xc, vc, ok)
        } else {
            let xc = along(-gamma);
            let vc = f(&xc);
            let ok = vc < vals[worst];
            (xc, vc, ok)
        };
        if accept {
            pts[worst] = xc;
            vals[worst] = vc;
            continue;
        }
        let anchor = pts[best].clone();
        for &idx in &order[1..] {
            let shrunk: Vec<f64> = anchor
                .iter()
                .zip(&pts[idx])
                .map(|(a, x)| a + delta * (x - a))
                .collect();
            vals[idx] = f(&shrunk);
            pts[idx] = shrunk;
        }
    }

    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best], iters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimplexOptions {
        SimplexOptions {
            max_iters: 20_000,
            value_tol: 1e-12,
            initial_step: 0.5,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 1.0).powi(2)).sum();
        let r = minimize(f, &[0.0; 6], &opts());
        assert!(r.converged);
        assert!(r.value < 1e-9, "{}", r.value);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &opts());
        assert!(r.value < 1e-9);
        assert!((r.x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn nonsmooth_abs() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).abs()).sum();
        let r = minimize(f, &[2.0, -1.0, 0.5], &opts());
        assert!(r.value < 1e-6, "{}", r.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = minimize(
            f,
            &[-1.2, 1.0],
            &SimplexOptions {
                max_iters: 10,
                ..opts()
            },
        );
        assert!(!r.converged);
        assert!(r.iterations <= 10);
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { (x[0] - 1.0).powi(2) + x[1] * x[1] };
        let r = minimize(f, &[0.5, 0.5], &opts());
        assert!(r.value < 1e-9);
    }
}
