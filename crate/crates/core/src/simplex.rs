//! Nelder–Mead minimization with a single re-inflated restart.

/// Outcome of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Search controls. `steps` sets the initial edge length along each coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub tol: f64,
    pub max_evals: usize,
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            tol: 1e-6,
            max_evals: 500,
            restarts: 1,
        }
    }
}

/// Minimizes `f` from `x0`. Non-finite values are treated as `+inf`.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), steps.len());
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best = run(&mut eval, x0, steps, opts.tol, opts.max_evals);
    for _ in 0..opts.restarts {
        let again = run(&mut eval, &best.x, steps, opts.tol, opts.max_evals);
        let evaluations = best.evaluations + again.evaluations;
        let settled = (best.value - again.value).abs() <= opts.tol * (1.0 + again.value.abs());
        best = if again.value <= best.value {
            SimplexResult {
                converged: again.converged && settled,
                evaluations,
                ..again
            }
        } else {
            SimplexResult {
                converged: best.converged && again.converged,
                evaluations,
                ..best
            }
        };
    }
    best
}

fn run<F>(f: &mut F, x0: &[f64], steps: &[f64], tol: f64, max_evals: usize) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let f_spread = if vals[n].is_finite() {
            vals[n] - vals[0]
        } else {
            f64::INFINITY
        };
        let diameter = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())))
            .fold(0.0, f64::max);
        if f_spread <= tol * (1.0 + vals[0].abs()) && diameter <= tol.sqrt() {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |c: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + c * (pts[n][j] - centroid[j])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = (0..n).map(|j| pts[0][j] + 0.5 * (pts[i][j] - pts[0][j])).collect();
            vals[i] = f(&shrunk);
            pts[i] = shrunk;
        }
        evals += n;
    }

    let i = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult {
        x: pts[i].clone(),
        value: vals[i],
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &[0.5, 0.5],
            &SimplexOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] + 2.0).abs() < 1e-3);
    }

    #[test]
    fn rosenbrock() {
        let opts = SimplexOptions {
            max_evals: 2000,
            ..Default::default()
        };
        let r = minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &opts,
        );
        assert!((r.x[0] - 1.0).abs() < 1e-2, "{:?}", r);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let r = minimize(
            |x| if x[0] < 0.5 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[2.0],
            &[0.3],
            &SimplexOptions::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn budget_is_respected() {
        let opts = SimplexOptions {
            max_evals: 20,
            restarts: 0,
            ..Default::default()
        };
        let r = minimize(|x| x[0].abs() + x[1].abs(), &[5.0, 5.0], &[0.01, 0.01], &opts);
        assert!(!r.converged);
        assert!(r.evaluations <= 22);
    }
}
