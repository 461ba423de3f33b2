//! Closed-form objective for Gaussian block laws under the standard normal
//! weight `w(t) = (2π)^{−p/2} e^{−tᵀt/2}`:
//!
//! `∫ |φ_n(t) − e^{−tᵀΓt/2}|² w(t) dt
//!   = det(2Γ + I)^{−1/2} + (1/n²) ΣΣ e^{−|X_j − X_k|²/2}
//!   − 2 det(Γ + I)^{−1/2} (1/n) Σ e^{−X_jᵀ (Γ + I)^{−1} X_j / 2}`.

use nalgebra::DMatrix;

use super::double_sum::self_term;
use crate::error::{Error, Result};
use crate::models::{BlockSet, CompactBlocks};
use crate::weights::{WeightFamily, WeightSpec};

#[derive(Debug, Clone)]
pub struct OracleGaussianObjective {
    obs: CompactBlocks,
    observed_term: f64,
}

impl OracleGaussianObjective {
    pub fn new(obs_blocks: &BlockSet) -> Result<Self> {
        if obs_blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        let obs = CompactBlocks::from_block_set(obs_blocks);
        let weight = WeightSpec::new(WeightFamily::Gaussian, obs.p);
        let observed_term = self_term(&obs, &weight);
        Ok(Self { obs, observed_term })
    }

    pub fn observed_term(&self) -> f64 {
        self.observed_term
    }

    pub fn value(&self, gamma: &DMatrix<f64>) -> Result<f64> {
        let p = self.obs.p;
        if gamma.nrows() != p || gamma.ncols() != p {
            return Err(Error::Dimension(format!(
                "{}x{} covariance for blocks of dimension {p}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        if gamma.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let eye = DMatrix::<f64>::identity(p, p);
        let two = (gamma * 2.0 + &eye)
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        let one = (gamma + &eye).cholesky().ok_or(Error::NotPositiveDefinite)?;
        // det(A)^{-1/2} = 1 / Π diag(L).
        let inv_sqrt_det = |l: &DMatrix<f64>| 1.0 / l.diagonal().iter().product::<f64>();
        let first = inv_sqrt_det(&two.l());
        let scale = inv_sqrt_det(&one.l());

        let mut acc = 0.0;
        for j in 0..self.obs.distinct() {
            let x = nalgebra::DVector::from_column_slice(self.obs.row(j));
            let y = one.l().solve_lower_triangular(&x).expect("nonsingular factor");
            acc += self.obs.counts[j] * (-0.5 * y.norm_squared()).exp();
        }
        let cross = scale * acc / self.obs.total;
        Ok((first + self.observed_term - 2.0 * cross).max(0.0))
    }
}

/// Oracle objective for a Gaussian block law with covariance `gamma`.
pub fn q_oracle_gaussian(obs_blocks: &BlockSet, gamma: &DMatrix<f64>) -> Result<f64> {
    OracleGaussianObjective::new(obs_blocks)?.value(gamma)
}
