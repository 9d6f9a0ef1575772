//! Derivative-free Nelder-Mead simplex minimisation.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

/// Nelder-Mead settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub diameter_tol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            diameter_tol: 1e-9,
            max_iterations: 500,
        }
    }
}

/// Outcome of a minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// The simplex diameter fell below the tolerance.
    pub converged: bool,
    /// Best objective value after each iteration. Never increases.
    pub trace: Vec<f64>,
}

impl NelderMead {
    /// Minimises `f` from `start`. Infeasible points should evaluate to
    /// `f64::INFINITY`; the simplex then contracts away from them.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, start: &[f64]) -> Minimum {
        let n = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((start.to_vec(), f(start)));
        for i in 0..n {
            let mut p = start.to_vec();
            p[i] += self.initial_step;
            let v = f(&p);
            simplex.push((p, v));
        }
        let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
        order(&mut simplex);

        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for (p, _) in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (w - c)).collect()
            };

            let reflected = along(-1.0);
            let f_r = f(&reflected);
            if f_r < simplex[0].1 {
                let expanded = along(-2.0);
                let f_e = f(&expanded);
                simplex[n] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            } else if f_r < simplex[n - 1].1 {
                simplex[n] = (reflected, f_r);
            } else {
                let (contracted, f_c) = if f_r < worst.1 {
                    let p = along(-0.5);
                    let v = f(&p);
                    (p, v)
                } else {
                    let p = along(0.5);
                    let v = f(&p);
                    (p, v)
                };
                if f_c < worst.1.min(f_r) {
                    simplex[n] = (contracted, f_c);
                } else {
                    let best = simplex[0].0.clone();
                    for (p, v) in simplex.iter_mut().skip(1) {
                        for (x, b) in p.iter_mut().zip(&best) {
                            *x = b + 0.5 * (*x - b);
                        }
                        *v = f(p);
                    }
                }
            }
            order(&mut simplex);
            trace.push(simplex[0].1);
        }
        let (point, value) = simplex.swap_remove(0);
        Minimum {
            point,
            value,
            iterations,
            converged,
            trace,
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(p, _)| sqrt(p.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum()))
        .fold(0.0, f64::max)
}
