//! Control-variate objective, integrated by Monte Carlo over a frozen grid of
//! weight draws:
//!
//! `Q^{(cv)}(θ) ≈ (1/M) Σ_m |φ_n(t_m) − φ̌(t_m,θ)|² / max(t_mᵀΓ̂t_m, floor)`
//!
//! where `φ̌` is the control-variate chf where `t_mᵀΓ̂t_m < k` and the plain
//! Monte Carlo chf elsewhere.

use num_complex::Complex64;
use rayon::prelude::*;

use super::empirical::EmpiricalCovariance;
use super::ObjectiveConfig;
use crate::chf::{chf_rows, control_expectations, cv_rows, Rows};
use crate::error::{Error, Result};
use crate::models::{BlockMoments, BlockSet, CompactBlocks, ModelFamily};

#[derive(Debug, Clone)]
pub struct CvObjective {
    p: usize,
    k: f64,
    t_grid: Vec<f64>,
    phi_n: Vec<Complex64>,
    denom: Vec<f64>,
    var_hat: Vec<f64>,
}

impl CvObjective {
    /// Precomputes `φ_n` and `t_mᵀΓ̂t_m` on the frozen grid.
    pub fn new(
        obs_blocks: &BlockSet,
        emp_cov: &EmpiricalCovariance,
        t_grid: Vec<f64>,
        k: f64,
        variance_floor: f64,
    ) -> Result<Self> {
        if obs_blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        let p = obs_blocks.p();
        if emp_cov.p() != p || t_grid.is_empty() || t_grid.len() % p != 0 {
            return Err(Error::Dimension(format!(
                "blocks of dimension {p}, covariance of dimension {}, grid of {} values",
                emp_cov.p(),
                t_grid.len()
            )));
        }
        if !(emp_cov.gamma_hat[0] > 0.0) {
            return Err(Error::DegenerateCovariance);
        }
        if !(k >= 0.0) || !(variance_floor > 0.0) {
            return Err(Error::Config(format!(
                "need k >= 0 and a positive variance floor, got k = {k}, floor = {variance_floor}"
            )));
        }
        let gamma = emp_cov.matrix();
        let var_hat: Vec<f64> = t_grid
            .chunks_exact(p)
            .map(|t| crate::linalg::quad_form(t, &gamma))
            .collect();
        let denom = var_hat.iter().map(|v| v.max(variance_floor)).collect();
        let obs = CompactBlocks::from_block_set(obs_blocks);
        let rows = Rows::compact(&obs);
        let phi_n = t_grid.par_chunks(p).map(|t| chf_rows(rows, t)).collect();
        Ok(Self {
            p,
            k,
            t_grid,
            phi_n,
            denom,
            var_hat,
        })
    }

    pub fn grid_len(&self) -> usize {
        self.phi_n.len()
    }

    /// Number of grid points at which the control-variate chf is used.
    pub fn cv_points(&self) -> usize {
        self.var_hat.iter().filter(|v| **v < self.k).count()
    }

    pub fn value(&self, sim_blocks: &BlockSet, moments: &BlockMoments) -> Result<f64> {
        if sim_blocks.p() != self.p || moments.p() != self.p {
            return Err(Error::Dimension("simulated blocks or moments of wrong dimension".into()));
        }
        if sim_blocks.len() < 3 {
            return Err(Error::TooFewBlocks(sim_blocks.len()));
        }
        let sim = CompactBlocks::from_block_set(sim_blocks);
        let rows = Rows::compact(&sim);
        let terms: Vec<f64> = self
            .t_grid
            .par_chunks(self.p)
            .enumerate()
            .map(|(m, t)| {
                let approx = if self.var_hat[m] < self.k {
                    let (m1, m2) = control_expectations(t, moments);
                    cv_rows(rows, t, m1, m2).0
                } else {
                    chf_rows(rows, t)
                };
                (self.phi_n[m] - approx).norm_sqr() / self.denom[m]
            })
            .collect();
        Ok(terms.iter().sum::<f64>() / terms.len() as f64)
    }
}

/// `Q^{(cv)}` at `theta`, simulating `config.h` blocks from the frozen seed
/// plan of `config`.
pub fn q_cv(
    obs_blocks: &BlockSet,
    theta: &[f64],
    model: &ModelFamily,
    config: &ObjectiveConfig,
    emp_cov: &EmpiricalCovariance,
    t_grid: &[f64],
) -> Result<f64> {
    let objective = CvObjective::new(
        obs_blocks,
        emp_cov,
        t_grid.to_vec(),
        config.k,
        config.variance_floor,
    )?;
    let variates = model.draw_variates(&config.seed_plan, config.replication, config.h, config.p);
    let sim = model.simulate_blocks(theta, &variates)?;
    objective.value(&sim, &model.moments(theta, config.p)?)
}
