use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::toeplitz;

/// First and second order structure of a `p`-block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl BlockMoments {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if !cov.is_square() || cov.nrows() != mean.len() {
            return Err(Error::Dimension(format!(
                "mean of length {} with a {}x{} covariance",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn p(&self) -> usize {
        self.mean.len()
    }

    pub(crate) fn centered_gaussian(gamma: &[f64]) -> Self {
        Self {
            mean: DVector::zeros(gamma.len()),
            cov: toeplitz(gamma),
        }
    }
}

pub(crate) fn check_phi(phi: f64) -> Result<()> {
    if !(phi.abs() < 1.0) {
        return Err(Error::Stationarity(phi.abs()));
    }
    Ok(())
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma = {sigma} must be positive")));
    }
    Ok(())
}

pub(crate) fn check_d(d: f64) -> Result<()> {
    if !(d > -0.5 && d < 0.5) {
        return Err(Error::Domain(format!("d = {d} must lie in (-0.5, 0.5)")));
    }
    Ok(())
}

fn check_p(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::Dimension("block length p must be positive".into()));
    }
    Ok(())
}

/// Autocovariances `γ(0..p)` of a stationary AR(1): `σ² φ^h / (1 − φ²)`.
pub fn ar1_autocovariance(phi: f64, sigma: f64, p: usize) -> Result<Vec<f64>> {
    check_phi(phi)?;
    check_sigma(sigma)?;
    let g0 = sigma * sigma / (1.0 - phi * phi);
    Ok((0..p).map(|h| g0 * phi.powi(h as i32)).collect())
}

pub fn ar1_covariance(phi: f64, sigma: f64, p: usize) -> Result<BlockMoments> {
    check_p(p)?;
    Ok(BlockMoments::centered_gaussian(&ar1_autocovariance(
        phi, sigma, p,
    )?))
}

/// Autocovariances `γ(0..p)` of ARFIMA(0,d,0):
/// `γ(0) = σ² Γ(1−2d) / Γ(1−d)²`, `γ(h) = γ(h−1) (h−1+d) / (h−d)`.
pub fn arfima_autocovariance(d: f64, sigma: f64, p: usize) -> Result<Vec<f64>> {
    check_d(d)?;
    check_sigma(sigma)?;
    let ratio = if d == 0.0 {
        1.0
    } else {
        (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp()
    };
    let mut gamma = Vec::with_capacity(p);
    let mut g = sigma * sigma * ratio;
    for h in 0..p {
        if h > 0 {
            let hf = h as f64;
            g *= (hf - 1.0 + d) / (hf - d);
        }
        gamma.push(g);
    }
    Ok(gamma)
}

pub fn arfima_covariance(d: f64, sigma: f64, p: usize) -> Result<BlockMoments> {
    check_p(p)?;
    Ok(BlockMoments::centered_gaussian(&arfima_autocovariance(
        d, sigma, p,
    )?))
}

/// Block moments of the Poisson-AR(1) model with latent log-intensity AR(1).
///
/// With `γ_α(h) = σ² φ^h / (1 − φ²)` and `μ = exp(β + γ_α(0)/2)`:
/// `E X_j = μ`, `Var X_j = μ + μ² (e^{γ_α(0)} − 1)` and
/// `Cov(X_i, X_j) = μ² (e^{γ_α(|i−j|)} − 1)`.
pub fn poisson_ar_moments(beta: f64, phi: f64, sigma: f64, p: usize) -> Result<BlockMoments> {
    check_p(p)?;
    let gamma = ar1_autocovariance(phi, sigma, p)?;
    let mu = (beta + gamma[0] / 2.0).exp();
    let mean = DVector::from_element(p, mu);
    let cov = DMatrix::from_fn(p, p, |i, j| {
        let lag = i.abs_diff(j);
        let c = mu * mu * gamma[lag].exp_m1();
        if lag == 0 {
            mu + c
        } else {
            c
        }
    });
    Ok(BlockMoments { mean, cov })
}

/// Variance-to-mean ratio of `exp(β + α_1)`: `exp(β + γ_α(0)/2) (e^{γ_α(0)} − 1)`.
pub fn index_of_dispersion(beta: f64, phi: f64, sigma: f64) -> Result<f64> {
    let g0 = ar1_autocovariance(phi, sigma, 1)?[0];
    Ok((beta + g0 / 2.0).exp() * g0.exp_m1())
}
