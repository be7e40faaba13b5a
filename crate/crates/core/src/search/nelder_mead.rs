//! Nelder-Mead simplex minimizer with dimension-adaptive coefficients
//! (Gao & Han), which keeps the method usable at the ~100-dimensional end of
//! the attack-matrix parameter space.

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    /// Evaluation budget, including the initial simplex.
    pub max_evals: usize,
    /// Initial simplex edge along each coordinate.
    pub step: f64,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ...and the simplex diameter (max-norm) below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            step: 0.1,
            f_tol: 1e-14,
            x_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

/// Minimizes `f` starting from `x0`. Non-finite values are treated as `+∞`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let d = dim as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / d);
    let (rho, sigma) = (0.75 - 1.0 / (2.0 * d), 1.0 - 1.0 / d);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += if x[i] == 0.0 { opts.step } else { opts.step * x[i].abs().max(1.0) };
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].1);

        let spread = simplex[dim].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d;
            }
        }
        let worst = simplex[dim].clone();

        // x_r = c + α (c − x_worst)
        let reflected = combine(&centroid, &worst.0, -alpha);
        let fr = eval(&reflected, &mut evals);

        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -alpha * gamma);
            let fe = eval(&expanded, &mut evals);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = combine(&centroid, &reflected, rho);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = combine(&centroid, &worst.0, rho);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < fr.min(worst.1) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = combine(&best, &vertex.0, sigma);
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f,
        evaluations: evals,
        iterations,
        converged,
        trace,
    }
}
