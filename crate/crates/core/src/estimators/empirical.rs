use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{quad_form, toeplitz};

/// Sample autocovariances `γ̂(0..p)` of the first `n = T − p + 1` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCovariance {
    pub gamma_hat: Vec<f64>,
    pub mu_hat: f64,
}

impl EmpiricalCovariance {
    pub fn p(&self) -> usize {
        self.gamma_hat.len()
    }

    /// Toeplitz matrix `Γ̂_p`.
    pub fn matrix(&self) -> DMatrix<f64> {
        toeplitz(&self.gamma_hat)
    }

    /// Estimated `Var⟨t, X_1⟩ = tᵀ Γ̂_p t`.
    pub fn variance_along(&self, t: &[f64]) -> f64 {
        quad_form(t, &self.matrix())
    }
}

/// `μ̂ = (1/n) Σ_{j<n} x_j` and `γ̂(h) = (1/(n−h)) Σ_{j<n−h} (x_j − μ̂)(x_{j+h} − μ̂)`
/// for `h = 0..p`, where `n = T − p + 1`.
pub fn empirical_covariance(series: &[f64], p: usize) -> Result<EmpiricalCovariance> {
    if p == 0 {
        return Err(Error::Dimension("block length p must be positive".into()));
    }
    if series.len() < 2 * p {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: 2 * p,
        });
    }
    let n = series.len() - p + 1;
    let x = &series[..n];
    let mu_hat = x.iter().sum::<f64>() / n as f64;
    let gamma_hat = (0..p)
        .map(|h| {
            let s: f64 = x[..n - h]
                .iter()
                .zip(&x[h..])
                .map(|(a, b)| (a - mu_hat) * (b - mu_hat))
                .sum();
            s / (n - h) as f64
        })
        .collect();
    Ok(EmpiricalCovariance { gamma_hat, mu_hat })
}
