//! Derivative-free simplex minimization.
//!
//! Hand-rolled Nelder-Mead with the dimension-adaptive coefficients of Gao
//! and Han. Fully deterministic for a fixed start and objective; NaN
//! objective values are treated as +inf so invalid candidates are simply
//! never selected.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Soft cap on objective evaluations; an iteration in flight may finish.
    pub max_evals: usize,
    /// Absolute displacement used to build the initial simplex.
    pub initial_step: f64,
    /// Stop when the simplex value spread falls below f_tol * (1 + |best|).
    pub f_tol: f64,
    /// Stop when every coordinate spread falls below x_tol.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 400, initial_step: 0.25, f_tol: 1e-12, x_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best value seen after each evaluation; nonincreasing by construction.
    pub trace: Vec<f64>,
}

pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n > 0, "nelder_mead needs at least one parameter");
    let (rho, chi, gamma, sigma) = if n >= 2 {
        let nf = n as f64;
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut evaluations = 0usize;
    let mut trace: Vec<f64> = Vec::new();
    let mut best_seen = f64::INFINITY;
    let mut eval = |x: &[f64], evals: &mut usize, trace: &mut Vec<f64>, best: &mut f64| -> f64 {
        let raw = f(x);
        let v = if raw.is_nan() { f64::INFINITY } else { raw };
        *evals += 1;
        if v < *best {
            *best = v;
        }
        trace.push(*best);
        v
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex
        .iter()
        .map(|x| eval(x, &mut evaluations, &mut trace, &mut best_seen))
        .collect();

    while evaluations < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let spread = values[n] - values[0];
        let xspread = (0..n)
            .map(|d| {
                let lo = simplex.iter().map(|x| x[d]).fold(f64::INFINITY, f64::min);
                let hi = simplex.iter().map(|x| x[d]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0f64, f64::max);
        if spread.is_finite()
            && spread <= opts.f_tol * (1.0 + values[0].abs())
            && xspread <= opts.x_tol
        {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|x| x[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point = |coef: f64| -> Vec<f64> {
            (0..n).map(|d| centroid[d] + coef * (centroid[d] - worst[d])).collect()
        };

        let xr = point(rho);
        let fr = eval(&xr, &mut evaluations, &mut trace, &mut best_seen);
        if fr < values[0] {
            let xe = point(rho * chi);
            let fe = eval(&xe, &mut evaluations, &mut trace, &mut best_seen);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = point(rho * gamma);
                let fc = eval(&xc, &mut evaluations, &mut trace, &mut best_seen);
                (xc, fc)
            } else {
                let xc = point(-gamma);
                let fc = eval(&xc, &mut evaluations, &mut trace, &mut best_seen);
                (xc, fc)
            };
            if fc < fr.min(values[n]) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    for d in 0..n {
                        simplex[i][d] = simplex[0][d] + sigma * (simplex[i][d] - simplex[0][d]);
                    }
                    let xi = simplex[i].clone();
                    values[i] = eval(&xi, &mut evaluations, &mut trace, &mut best_seen);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        trace,
    }
}
