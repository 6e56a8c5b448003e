//! Derivative-free local minimization (Nelder–Mead) for the numeric
//! radius search. Deterministic: no internal randomness.

pub struct NelderMeadOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iterations: 400,
            tolerance: 1e-14,
            initial_step: 0.25,
        }
    }
}

pub struct MinimumFound {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Standard Nelder–Mead with reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2. Terminates on simplex value spread below `tolerance` or on
/// the iteration budget.
pub fn nelder_mead<F>(f: F, start: &[f64], opts: &NelderMeadOptions) -> MinimumFound
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += opts.initial_step * (1.0 + p[i].abs());
        let v = f(&p);
        simplex.push((p, v));
    }

    for _ in 0..opts.max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= opts.tolerance * (1.0 + best.abs()) {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; n];
        for (p, _) in simplex.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(p.iter()) {
                *c += x / n as f64;
            }
        }
        let at = |alpha: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(simplex[n].0.iter())
                .map(|(c, w)| c + alpha * (c - w))
                .collect()
        };

        let reflected = at(1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = at(2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let contracted = if fr < simplex[n].1 { at(0.5) } else { at(-0.5) };
        let fc = f(&contracted);
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_point = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            for (x, b) in entry.0.iter_mut().zip(best_point.iter()) {
                *x = b + 0.5 * (*x - b);
            }
            entry.1 = f(&entry.0);
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (point, value) = simplex.swap_remove(0);
    MinimumFound { point, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |p: &[f64]| (p[0] - 3.0).powi(2) + (p[1] + 1.0).powi(2);
        let got = nelder_mead(f, &[0.0, 0.0], &NelderMeadOptions::default());
        assert!((got.point[0] - 3.0).abs() < 1e-6, "{:?}", got.point);
        assert!((got.point[1] + 1.0).abs() < 1e-6, "{:?}", got.point);
    }

    #[test]
    fn one_dimensional_valley() {
        let f = |p: &[f64]| (p[0] * p[0] - 9.0).powi(2);
        let got = nelder_mead(f, &[2.0], &NelderMeadOptions::default());
        assert!((got.point[0].abs() - 3.0).abs() < 1e-6);
    }
}
