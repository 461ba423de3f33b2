//! Nelder-Mead on an unconstrained reparametrisation of a box.
//!
//! Each coordinate is mapped to the real line: logistic for a finite box,
//! exponential for a half-line, identity for an unbounded coordinate.

use super::EstimationResult;
use crate::error::{Error, Result};
use crate::models::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Evaluation budget per Nelder-Mead run.
    pub max_evaluations: usize,
    /// Simplex diameter (transformed space) below which a run stops.
    pub tolerance: f64,
    /// Extra runs started from the incumbent.
    pub restarts: usize,
    /// Recorded in the result only.
    pub master_seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            tolerance: 1e-4,
            restarts: 1,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    Logit { lo: f64, hi: f64 },
    Above(f64),
    Below(f64),
}

impl Map {
    fn new(lo: f64, hi: f64) -> Self {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => Map::Logit { lo, hi },
            (true, false) => Map::Above(lo),
            (false, true) => Map::Below(hi),
            (false, false) => Map::Identity,
        }
    }

    fn to_x(self, y: f64) -> f64 {
        match self {
            Map::Identity => y,
            Map::Logit { lo, hi } => lo + (hi - lo) / (1.0 + (-y).exp()),
            Map::Above(lo) => lo + y.exp(),
            Map::Below(hi) => hi - y.exp(),
        }
    }

    fn to_y(self, x: f64) -> f64 {
        match self {
            Map::Identity => x,
            Map::Logit { lo, hi } => {
                let u = (x - lo) / (hi - lo);
                (u / (1.0 - u)).ln()
            }
            Map::Above(lo) => (x - lo).ln(),
            Map::Below(hi) => (hi - x).ln(),
        }
    }

    fn interior(self, x: f64) -> bool {
        match self {
            Map::Identity => x.is_finite(),
            Map::Logit { lo, hi } => lo < x && x < hi,
            Map::Above(lo) => lo < x && x.is_finite(),
            Map::Below(hi) => x < hi && x.is_finite(),
        }
    }
}

struct Counted<'a, F> {
    f: &'a mut F,
    maps: &'a [Map],
    evaluations: usize,
    best_x: Vec<f64>,
    best_value: f64,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, y: &[f64]) -> f64 {
        let x: Vec<f64> = y.iter().zip(self.maps).map(|(v, m)| m.to_x(*v)).collect();
        let interior = x.iter().zip(self.maps).all(|(v, m)| m.interior(*v));
        let raw = if interior { (self.f)(&x) } else { f64::INFINITY };
        let value = if raw.is_finite() { raw } else { f64::INFINITY };
        self.evaluations += 1;
        // First point attaining the strictly smallest value.
        if value < self.best_value {
            self.best_value = value;
            self.best_x = x;
        }
        value
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            let s: f64 = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

/// Initial simplex around `x0`: vertex `i` moves coordinate `i` by
/// `0.1·max(|x0_i|, 1)` in x-space, flipped (or halved towards the bound) if
/// the step would leave the box.
fn initial_simplex(x0: &[f64], maps: &[Map]) -> Vec<Vec<f64>> {
    let y0: Vec<f64> = x0.iter().zip(maps).map(|(x, m)| m.to_y(*x)).collect();
    let mut simplex = vec![y0.clone()];
    for i in 0..x0.len() {
        let h = 0.1 * x0[i].abs().max(1.0);
        let m = maps[i];
        let xi = if m.interior(x0[i] + h) {
            x0[i] + h
        } else if m.interior(x0[i] - h) {
            x0[i] - h
        } else {
            match m {
                Map::Logit { lo, hi } => {
                    if hi - x0[i] >= x0[i] - lo {
                        x0[i] + 0.5 * (hi - x0[i])
                    } else {
                        x0[i] - 0.5 * (x0[i] - lo)
                    }
                }
                Map::Above(lo) => x0[i] + h.max(x0[i] - lo),
                Map::Below(hi) => x0[i] - h.max(hi - x0[i]),
                Map::Identity => x0[i] + h,
            }
        };
        let mut v = y0.clone();
        v[i] = m.to_y(xi);
        if v[i] == y0[i] {
            v[i] += 0.1;
        }
        simplex.push(v);
    }
    simplex
}

/// One Nelder-Mead run; returns whether the diameter criterion was met.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<'_, F>,
    mut simplex: Vec<Vec<f64>>,
    budget: usize,
    tolerance: f64,
) -> bool {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let stop = obj.evaluations + budget;
    let dim = simplex.len() - 1;
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.eval(v)).collect();

    let combine = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
    };

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < tolerance {
            return true;
        }
        if obj.evaluations >= stop {
            return false;
        }

        let mut centroid = vec![0.0; dim];
        for v in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let (f_best, f_second, f_worst) = (values[0], values[dim - 1], values[dim]);

        // c + α(c − worst)
        let reflected = combine(&centroid, &worst, -ALPHA);
        let fr = obj.eval(&reflected);
        if fr < f_best {
            let expanded = combine(&centroid, &reflected, GAMMA);
            let fe = obj.eval(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < f_second {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc, accept) = if fr < f_worst {
            let c = combine(&centroid, &reflected, RHO);
            let fc = obj.eval(&c);
            (c, fc, fc <= fr)
        } else {
            let c = combine(&centroid, &worst, RHO);
            let fc = obj.eval(&c);
            (c, fc, fc < f_worst)
        };
        if accept {
            simplex[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = combine(&best, &simplex[i], SIGMA);
            values[i] = obj.eval(&simplex[i]);
        }
    }
}

/// Minimises `objective` over the box of `theta0`, starting from its values.
///
/// Non-finite objective values are treated as `+∞`. The returned point is the
/// first evaluated point attaining the smallest value seen.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    theta0: &ParameterVector,
    options: &MinimizeOptions,
) -> Result<EstimationResult> {
    if theta0.is_empty() {
        return Err(Error::Dimension("nothing to minimise over".into()));
    }
    if options.max_evaluations == 0 || !(options.tolerance > 0.0) {
        return Err(Error::Config(
            "minimizer needs a positive evaluation budget and tolerance".into(),
        ));
    }
    let maps: Vec<Map> = theta0
        .lower()
        .iter()
        .zip(theta0.upper())
        .map(|(lo, hi)| Map::new(*lo, *hi))
        .collect();
    let x0 = theta0.values().to_vec();
    if !x0.iter().zip(&maps).all(|(x, m)| m.interior(*x)) {
        return Err(Error::Domain("starting point must lie strictly inside the box".into()));
    }

    let mut obj = Counted {
        f: &mut objective,
        maps: &maps,
        evaluations: 0,
        best_x: x0.clone(),
        best_value: f64::INFINITY,
    };
    let y0: Vec<f64> = x0.iter().zip(&maps).map(|(x, m)| m.to_y(*x)).collect();
    if !obj.eval(&y0).is_finite() {
        return Err(Error::NonFiniteStart);
    }

    let mut converged = nelder_mead(
        &mut obj,
        initial_simplex(&x0, &maps),
        options.max_evaluations,
        options.tolerance,
    );
    for _ in 0..options.restarts {
        let start = obj.best_x.clone();
        converged = nelder_mead(
            &mut obj,
            initial_simplex(&start, &maps),
            options.max_evaluations,
            options.tolerance,
        );
    }

    Ok(EstimationResult {
        theta_hat: theta0.with_values(obj.best_x.clone())?,
        objective_value: obj.best_value,
        evaluations: obj.evaluations,
        converged,
        master_seed: options.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxed(values: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> ParameterVector {
        ParameterVector::new(values, lo, hi).unwrap()
    }

    #[test]
    fn quadratic_bowl() {
        let a = [0.3, 2.5, -1.0];
        let theta0 = boxed(
            vec![0.0, 1.0, 0.0],
            vec![-1.0, 0.0, f64::NEG_INFINITY],
            vec![1.0, f64::INFINITY, f64::INFINITY],
        );
        let bowl = |x: &[f64]| x.iter().zip(&a).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
        let r = minimize(bowl, &theta0, &MinimizeOptions::default()).unwrap();
        for (x, t) in r.theta_hat.values().iter().zip(&a) {
            assert!((x - t).abs() < 1e-3, "{:?}", r.theta_hat.values());
        }
        assert!(r.converged);
        assert!(r.evaluations <= 2 * 2000 + 1);
    }

    #[test]
    fn plateau_returns_point_on_minimal_plateau() {
        // Staircase bowl; the minimal level 0 is the disc of radius 0.1 at (0.5, 1.5).
        let f = |x: &[f64]| (((x[0] - 0.5).powi(2) + (x[1] - 1.5).powi(2)) * 100.0).floor();
        let theta0 = boxed(vec![0.1, 1.2], vec![-1.0, 0.0], vec![1.0, f64::INFINITY]);
        let r = minimize(f, &theta0, &MinimizeOptions::default()).unwrap();
        assert_eq!(r.objective_value, 0.0);
        assert_eq!(f(r.theta_hat.values()), 0.0);
    }

    #[test]
    fn respects_bounds() {
        let theta0 = boxed(vec![0.0, 1.0], vec![-0.99, 0.0], vec![0.99, f64::INFINITY]);
        let r = minimize(|x: &[f64]| -x[0] + (x[1] - 0.5).powi(2), &theta0, &MinimizeOptions::default()).unwrap();
        assert!(theta0.contains(r.theta_hat.values()));
        assert!(r.theta_hat.values()[0] > 0.98);
    }

    #[test]
    fn non_finite_start() {
        let theta0 = boxed(vec![0.0], vec![-1.0], vec![1.0]);
        let r = minimize(|_: &[f64]| f64::NAN, &theta0, &MinimizeOptions::default());
        assert_eq!(r.unwrap_err(), Error::NonFiniteStart);
    }

    #[test]
    fn start_on_boundary_rejected() {
        let theta0 = boxed(vec![1.0], vec![-1.0], vec![1.0]);
        assert!(minimize(|x: &[f64]| x[0], &theta0, &MinimizeOptions::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let theta0 = boxed(vec![0.2, 0.7], vec![-1.0, 0.0], vec![1.0, f64::INFINITY]);
        let f = |x: &[f64]| (x[0] - 0.1).powi(2) + (x[1] - 1.0).abs();
        let a = minimize(f, &theta0, &MinimizeOptions::default()).unwrap();
        let b = minimize(f, &theta0, &MinimizeOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
