use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::moments::{arfima_autocovariance, check_d, check_phi, check_sigma, BlockMoments};
use super::Innovation;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, lower_mul, toeplitz};
use crate::rng::Stream;

/// Largest Poisson mean the samplers accept.
pub const POISSON_MEAN_LIMIT: f64 = 1e8;

/// Number of pre-sample innovations in the truncated MA(∞) ARFIMA path.
pub const ARFIMA_PRESAMPLE: usize = 1000;

/// One innovation with mean zero and unit variance.
pub fn standardized_innovation<R: Rng + ?Sized>(innovation: Innovation, rng: &mut R) -> f64 {
    match innovation {
        Innovation::Gaussian => rng.sample(StandardNormal),
        Innovation::Laplace => {
            // Laplace(0, b) has variance 2b²; b = 1/√2.
            let e: f64 = rng.sample(Exp1);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * e * std::f64::consts::FRAC_1_SQRT_2
        }
        Innovation::StudentT6 => {
            // Var t_6 = 6/4.
            let t = StudentT::new(6.0).expect("valid dof");
            let x: f64 = t.sample(rng);
            x / 1.5f64.sqrt()
        }
    }
}

/// Draws `mean + L z` for a fixed covariance, caching the Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianBlockSampler {
    mean: Vec<f64>,
    chol: DMatrix<f64>,
}

impl GaussianBlockSampler {
    pub fn new(moments: &BlockMoments) -> Result<Self> {
        Ok(Self {
            mean: moments.mean.iter().copied().collect(),
            chol: cholesky_lower(&moments.cov)?,
        })
    }

    pub fn p(&self) -> usize {
        self.mean.len()
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `mean + L z` for given standardized variates.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        lower_mul(&self.chol, z, out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
    }

    pub fn sample(&self, innovation: Innovation, stream: &mut Stream) -> Vec<f64> {
        let z: Vec<f64> = (0..self.p())
            .map(|_| standardized_innovation(innovation, stream))
            .collect();
        let mut out = vec![0.0; self.p()];
        self.transform(&z, &mut out);
        out
    }
}

/// `mean + L z` with `z` drawn from `stream`. Fails if the covariance is not
/// positive definite.
pub fn gaussian_block_sample(
    moments: &BlockMoments,
    innovation: Innovation,
    stream: &mut Stream,
) -> Result<Vec<f64>> {
    Ok(GaussianBlockSampler::new(moments)?.sample(innovation, stream))
}

/// Stationary AR(1) block from `p` standard normals:
/// `X_1 = σ/√(1−φ²) z_1`, `X_j = φ X_{j−1} + σ z_j`.
pub fn ar1_block_from_normals(phi: f64, sigma: f64, z: &[f64], out: &mut [f64]) {
    let sd0 = sigma / (1.0 - phi * phi).sqrt();
    let mut x = sd0 * z[0];
    out[0] = x;
    for j in 1..z.len() {
        x = phi * x + sigma * z[j];
        out[j] = x;
    }
}

pub fn ar1_block_sample(phi: f64, sigma: f64, p: usize, stream: &mut Stream) -> Result<Vec<f64>> {
    check_phi(phi)?;
    check_sigma(sigma)?;
    let z: Vec<f64> = (0..p).map(|_| stream.sample(StandardNormal)).collect();
    let mut out = vec![0.0; p];
    ar1_block_from_normals(phi, sigma, &z, &mut out);
    Ok(out)
}

/// Smallest `k` with `P(N ≤ k) ≥ u` for `N ~ Poisson(lambda)`.
///
/// Deterministic in `(lambda, u)`, which makes simulated count blocks
/// piecewise constant in the parameters under fixed uniforms.
pub fn poisson_inverse_cdf(lambda: f64, u: f64) -> Result<f64> {
    if !(lambda <= POISSON_MEAN_LIMIT) {
        return Err(Error::MeanOverflow(lambda));
    }
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    if lambda < 30.0 {
        let mut k = 0.0;
        let mut pmf = (-lambda).exp();
        let mut cdf = pmf;
        while cdf < u {
            k += 1.0;
            pmf *= lambda / k;
            if pmf < f64::MIN_POSITIVE && k > lambda {
                break;
            }
            cdf += pmf;
        }
        return Ok(k);
    }

    // Start near the answer and walk with the pmf recursion.
    let z = Normal::standard().inverse_cdf(u);
    let mut k = (lambda + lambda.sqrt() * z).floor().max(0.0);
    let ln_pmf = |k: f64| k * lambda.ln() - lambda - ln_gamma(k + 1.0);
    let mut pmf = ln_pmf(k).exp();
    let mut cdf = gamma_ur(k + 1.0, lambda);
    if cdf >= u {
        while k > 0.0 && cdf - pmf >= u {
            cdf -= pmf;
            pmf *= k / lambda;
            k -= 1.0;
        }
    } else {
        while cdf < u {
            k += 1.0;
            pmf *= lambda / k;
            if pmf < f64::MIN_POSITIVE && k > lambda {
                break;
            }
            cdf += pmf;
        }
    }
    Ok(k)
}

/// Poisson-AR block from `p` normals (latent AR(1)) and `p` uniforms
/// (inverse-CDF count draws).
pub fn poisson_ar_block_from_variates(
    beta: f64,
    phi: f64,
    sigma: f64,
    z: &[f64],
    u: &[f64],
    out: &mut [f64],
) -> Result<()> {
    ar1_block_from_normals(phi, sigma, z, out);
    for (x, &uj) in out.iter_mut().zip(u) {
        let lambda = (beta + *x).exp();
        *x = poisson_inverse_cdf(lambda, uj)?;
    }
    Ok(())
}

pub fn poisson_ar_block_sample(
    beta: f64,
    phi: f64,
    sigma: f64,
    p: usize,
    stream: &mut Stream,
) -> Result<Vec<f64>> {
    check_phi(phi)?;
    check_sigma(sigma)?;
    let z: Vec<f64> = (0..p).map(|_| stream.sample(StandardNormal)).collect();
    let u: Vec<f64> = (0..p).map(|_| stream.open01()).collect();
    let mut out = vec![0.0; p];
    poisson_ar_block_from_variates(beta, phi, sigma, &z, &u, &mut out)?;
    Ok(out)
}

/// MA(∞) weights of `(1 − B)^{−d}`: `ψ_0 = 1`, `ψ_k = ψ_{k−1} (k − 1 + d) / k`.
pub fn arfima_ma_weights(d: f64, count: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(count);
    let mut w = 1.0;
    for k in 0..count {
        if k > 0 {
            let kf = k as f64;
            w *= (kf - 1.0 + d) / kf;
        }
        psi.push(w);
    }
    psi
}

/// Exact stationary Gaussian ARFIMA path via the Cholesky factor of the
/// `len × len` Toeplitz covariance. The factor is computed once and reused.
#[derive(Debug, Clone)]
pub struct ArfimaExactPath {
    chol: DMatrix<f64>,
}

impl ArfimaExactPath {
    pub fn new(d: f64, sigma: f64, len: usize) -> Result<Self> {
        let gamma = arfima_autocovariance(d, sigma, len)?;
        Ok(Self {
            chol: cholesky_lower(&toeplitz(&gamma))?,
        })
    }

    pub fn sample(&self, stream: &mut Stream) -> Vec<f64> {
        let len = self.chol.nrows();
        let z: Vec<f64> = (0..len).map(|_| stream.sample(StandardNormal)).collect();
        let mut out = vec![0.0; len];
        lower_mul(&self.chol, &z, &mut out);
        out
    }
}

/// ARFIMA path driven by arbitrary standardized innovations, through the MA(∞)
/// representation truncated after [`ARFIMA_PRESAMPLE`] pre-sample terms.
pub fn arfima_ma_path(
    d: f64,
    sigma: f64,
    len: usize,
    innovation: Innovation,
    stream: &mut Stream,
) -> Result<Vec<f64>> {
    check_d(d)?;
    check_sigma(sigma)?;
    let total = len + ARFIMA_PRESAMPLE;
    let psi = arfima_ma_weights(d, total);
    let eps: Vec<f64> = (0..total)
        .map(|_| sigma * standardized_innovation(innovation, stream))
        .collect();
    // X_t = Σ_{k=0}^{t'} ψ_k ε_{t'−k}, t' = t + presample.
    Ok((0..len)
        .map(|t| {
            let tp = t + ARFIMA_PRESAMPLE;
            (0..=tp).map(|k| psi[k] * eps[tp - k]).sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::moments::{ar1_covariance, poisson_ar_moments};
    use crate::rng::{SeedPlan, StreamPurpose};

    fn stream(i: u64) -> Stream {
        SeedPlan::new(99).stream_for(0, StreamPurpose::Auxiliary, i)
    }

    #[test]
    fn zero_innovation_returns_mean() {
        let m = BlockMoments::new(
            nalgebra::DVector::from_column_slice(&[1.0, -2.0, 0.5]),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let s = GaussianBlockSampler::new(&m).unwrap();
        let mut out = [0.0; 3];
        s.transform(&[0.0; 3], &mut out);
        assert_eq!(out, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn gaussian_sampler_rejects_non_pd() {
        let m = BlockMoments::new(
            nalgebra::DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 - 1e-3]),
        )
        .unwrap();
        assert_eq!(
            gaussian_block_sample(&m, Innovation::Gaussian, &mut stream(0)).unwrap_err(),
            Error::NotPositiveDefinite
        );
    }

    #[test]
    fn samplers_are_deterministic() {
        let m = ar1_covariance(0.5, 1.0, 3).unwrap();
        for inn in [Innovation::Gaussian, Innovation::Laplace, Innovation::StudentT6] {
            let a = gaussian_block_sample(&m, inn, &mut stream(1)).unwrap();
            let b = gaussian_block_sample(&m, inn, &mut stream(1)).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(
            ar1_block_sample(0.3, 1.0, 3, &mut stream(2)).unwrap(),
            ar1_block_sample(0.3, 1.0, 3, &mut stream(2)).unwrap()
        );
        assert_eq!(
            poisson_ar_block_sample(0.15, 0.5, 0.619, 3, &mut stream(3)).unwrap(),
            poisson_ar_block_sample(0.15, 0.5, 0.619, 3, &mut stream(3)).unwrap()
        );
    }

    #[test]
    fn zero_variates_give_zero_ar1_block() {
        let mut out = [1.0; 4];
        ar1_block_from_normals(0.7, 2.0, &[0.0; 4], &mut out);
        assert_eq!(out, [0.0; 4]);
    }

    #[test]
    fn tiny_uniform_forces_zero_count() {
        let mut out = [0.0; 3];
        poisson_ar_block_from_variates(1.0, 0.5, 0.5, &[0.3, -0.2, 1.0], &[1e-300; 3], &mut out)
            .unwrap();
        assert_eq!(out, [0.0; 3]);
    }

    #[test]
    fn mean_overflow_is_reported() {
        assert!(matches!(poisson_inverse_cdf(1e9, 0.5), Err(Error::MeanOverflow(_))));
        assert!(matches!(poisson_inverse_cdf(f64::NAN, 0.5), Err(Error::MeanOverflow(_))));
        let mut out = [0.0; 2];
        let r = poisson_ar_block_from_variates(30.0, 0.0, 1.0, &[0.0; 2], &[0.5; 2], &mut out);
        assert!(matches!(r, Err(Error::MeanOverflow(_))));
    }

    /// Inverse CDF against a brute-force cumulative pmf in log space.
    #[test]
    fn inverse_cdf_matches_brute_force() {
        for &lambda in &[0.05, 1.5, 7.0, 29.9, 30.0, 55.5, 400.0, 12345.0] {
            for &u in &[1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 0.999999] {
                let mut cdf = 0.0;
                let mut k = 0.0f64;
                loop {
                    cdf += (k * f64::ln(lambda) - lambda - ln_gamma(k + 1.0)).exp();
                    if cdf >= u {
                        break;
                    }
                    k += 1.0;
                }
                let got = poisson_inverse_cdf(lambda, u).unwrap();
                assert!(
                    (got - k).abs() <= 1.0,
                    "lambda={lambda} u={u}: got {got}, brute force {k}"
                );
                if lambda < 30.0 {
                    assert_eq!(got, k, "lambda={lambda} u={u}");
                }
            }
        }
    }

    #[test]
    fn inverse_cdf_is_monotone_in_lambda() {
        let mut prev = 0.0;
        for i in 1..400 {
            let lambda = i as f64 * 0.25;
            let k = poisson_inverse_cdf(lambda, 0.6).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn poisson_block_mean_matches_moments() {
        let m = poisson_ar_moments(0.15, 0.5, 0.619, 3).unwrap();
        let n = 200_000;
        let mut s = stream(7);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += poisson_ar_block_sample(0.15, 0.5, 0.619, 3, &mut s).unwrap()[0];
        }
        let mean = sum / n as f64;
        assert!((mean - m.mean[0]).abs() / m.mean[0] < 0.01, "{mean}");
    }

    #[test]
    fn innovations_are_standardized() {
        for inn in [Innovation::Gaussian, Innovation::Laplace, Innovation::StudentT6] {
            let mut s = stream(20);
            let n = 400_000;
            let xs: Vec<f64> = (0..n).map(|_| standardized_innovation(inn, &mut s)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.01, "{inn:?} mean {mean}");
            assert!((var - 1.0).abs() < 0.02, "{inn:?} var {var}");
        }
    }

    #[test]
    fn ma_weights_recursion() {
        let psi = arfima_ma_weights(0.25, 4);
        assert_eq!(psi[0], 1.0);
        assert!((psi[1] - 0.25).abs() < 1e-15);
        assert!((psi[2] - 0.25 * 1.25 / 2.0).abs() < 1e-15);
        assert_eq!(arfima_ma_weights(0.0, 3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn arfima_paths_have_model_autocovariance() {
        let gamma = arfima_autocovariance(0.25, 1.0, 2).unwrap();
        let exact = ArfimaExactPath::new(0.25, 1.0, 60).unwrap();
        let reps = 4000;
        let (mut v_exact, mut c_exact, mut v_ma) = (0.0, 0.0, 0.0);
        for r in 0..reps {
            let x = exact.sample(&mut stream(1000 + r));
            v_exact += x[30] * x[30];
            c_exact += x[30] * x[31];
            let y = arfima_ma_path(0.25, 1.0, 40, Innovation::Laplace, &mut stream(9000 + r))
                .unwrap();
            v_ma += y[20] * y[20];
        }
        let r = reps as f64;
        assert!((v_exact / r - gamma[0]).abs() < 0.07, "{}", v_exact / r);
        assert!((c_exact / r - gamma[1]).abs() < 0.07, "{}", c_exact / r);
        // Truncation after 1000 lags loses a little variance at d = 0.25.
        assert!((v_ma / r - gamma[0]).abs() < 0.08, "{}", v_ma / r);
    }
}
