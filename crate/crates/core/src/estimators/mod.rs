//! Objectives and the estimators built on them.
//!
//! - [`oracle`]: closed-form objective for Gaussian block laws.
//! - [`double_sum`]: simulation-based objective as double sums of `w̃`.
//! - [`cv`]: control-variate objective, Monte Carlo integrated over a frozen
//!   grid of weight draws.
//! - [`minimize`]: Nelder-Mead on a transformed box.

pub mod cv;
pub mod empirical;
pub mod double_sum;
pub mod minimize;
pub mod oracle;

use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

pub use cv::{q_cv, CvObjective};
pub use empirical::{empirical_covariance, EmpiricalCovariance};
pub use double_sum::{q_nh, DoubleSumObjective};
pub use minimize::{minimize, MinimizeOptions};
pub use oracle::{q_oracle_gaussian, OracleGaussianObjective};

use crate::error::{Error, Result};
use crate::models::{make_blocks, ModelFamily, ModelKind, ParameterVector};
use crate::rng::{SeedPlan, StreamPurpose};
use crate::weights::{weight_sample, WeightFamily, WeightSpec};

/// Settings shared by the simulation-based and control-variate objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig {
    /// Block length.
    pub p: usize,
    /// Number of simulated blocks.
    pub h: usize,
    pub weight: WeightSpec,
    /// Variance threshold below which the control-variate chf is used.
    pub k: f64,
    /// Number of frozen integration points for the control-variate objective.
    pub m: usize,
    pub seed_plan: SeedPlan,
    pub variance_floor: f64,
    /// Replication index used in the keys of the simulation and grid streams.
    pub replication: u64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            p: 3,
            h: 3000,
            weight: WeightSpec::new(WeightFamily::Laplace, 3),
            k: 1.0,
            m: 2000,
            seed_plan: SeedPlan::new(0),
            variance_floor: 1e-6,
            replication: 0,
        }
    }
}

impl ObjectiveConfig {
    /// Defaults with the given weight family and master seed.
    pub fn with_weight(family: WeightFamily, master_seed: u64) -> Self {
        Self {
            seed_plan: SeedPlan::new(master_seed),
            weight: WeightSpec::new(family, 3),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.p == 0 {
            return bad("p must be positive".into());
        }
        if self.weight.dimension != self.p {
            return bad(format!(
                "weight dimension {} differs from p = {}",
                self.weight.dimension, self.p
            ));
        }
        if self.h < 3 {
            return bad(format!("H = {} must be at least 3", self.h));
        }
        if !(self.k > 0.0) {
            return bad(format!("k = {} must be positive", self.k));
        }
        if self.m < 100 {
            return bad(format!("M = {} must be at least 100", self.m));
        }
        if !(self.variance_floor > 0.0) || !self.variance_floor.is_finite() {
            return bad(format!("variance floor {} must be positive", self.variance_floor));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Oracle,
    SimulationBased,
    ControlVariates,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Oracle => "oracle",
            EstimatorKind::SimulationBased => "sim",
            EstimatorKind::ControlVariates => "cv",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(EstimatorKind::Oracle),
            "sim" | "simulation" | "simulation-based" => Ok(EstimatorKind::SimulationBased),
            "cv" | "control-variates" => Ok(EstimatorKind::ControlVariates),
            other => Err(Error::Config(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub theta_hat: ParameterVector,
    pub objective_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub master_seed: u64,
}

/// Method-of-moments starting point, strictly inside the default box.
pub fn initial_guess(series: &[f64], model: &ModelFamily) -> Result<Vec<f64>> {
    let ec = empirical_covariance(series, 2)?;
    let g0 = ec.gamma_hat[0];
    if !(g0 > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let rho = (ec.gamma_hat[1] / g0).clamp(-0.9, 0.9);
    let theta = match model.kind {
        ModelKind::GaussianAr1 => {
            vec![rho, (g0 * (1.0 - rho * rho)).sqrt().max(1e-3)]
        }
        ModelKind::Arfima0d0 => {
            let d = (rho / (1.0 + rho)).clamp(-0.45, 0.45);
            // γ(0) = σ² Γ(1 − 2d) / Γ(1 − d)²
            let ratio = (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
            vec![d, (g0 / ratio).sqrt().max(1e-3)]
        }
        ModelKind::PoissonAr1 => {
            // Invert E X = μ, Var X = μ + μ²(e^v − 1), Cov(X_0, X_1) = μ²(e^{φv} − 1)
            // for the latent variance v = σ²/(1 − φ²).
            let mu = ec.mu_hat.max(0.05);
            let v = (1.0 + (g0 - mu) / (mu * mu)).ln().max(0.05);
            let cov1 = ec.gamma_hat[1];
            let phi = ((1.0 + cov1 / (mu * mu)).max(1e-3).ln() / v).clamp(-0.9, 0.9);
            let sigma = (v * (1.0 - phi * phi)).sqrt().max(1e-3);
            vec![mu.ln() - v / 2.0, phi, sigma]
        }
    };
    Ok(theta)
}

/// Estimates `θ` from `series` by minimising the chosen objective.
///
/// Simulated blocks (and, for control variates, the integration grid) are
/// drawn once from `config.seed_plan` and reused at every `θ`, so the
/// objective is a deterministic function of `θ`. Parameter values at which the
/// objective cannot be evaluated are scored `+∞`.
pub fn estimate(
    series: &[f64],
    model: &ModelFamily,
    estimator: EstimatorKind,
    config: &ObjectiveConfig,
) -> Result<EstimationResult> {
    config.validate()?;
    let p = config.p;
    let obs = make_blocks(series, p)?;
    let theta0 = model.parameter_vector(initial_guess(series, model)?)?;
    let options = MinimizeOptions {
        master_seed: config.seed_plan.master_seed,
        ..MinimizeOptions::default()
    };
    let or_inf = |r: Result<f64>| r.unwrap_or(f64::INFINITY);

    match estimator {
        EstimatorKind::Oracle => {
            if !model.has_closed_form_chf() {
                return Err(Error::Unsupported(format!(
                    "the oracle estimator needs a closed-form chf, which {} lacks",
                    model.kind
                )));
            }
            if config.weight.family != WeightFamily::Gaussian {
                return Err(Error::Unsupported(format!(
                    "the oracle objective is closed-form only for the gaussian weight, not {}",
                    config.weight.family
                )));
            }
            let objective = OracleGaussianObjective::new(&obs)?;
            minimize(
                |theta: &[f64]| {
                    or_inf(model.moments(theta, p).and_then(|m| objective.value(&m.cov)))
                },
                &theta0,
                &options,
            )
        }
        EstimatorKind::SimulationBased => {
            let objective = DoubleSumObjective::new(&obs, config.weight)?;
            let variates = model.draw_variates(&config.seed_plan, config.replication, config.h, p);
            minimize(
                |theta: &[f64]| {
                    or_inf(model.simulate_blocks(theta, &variates).map(|s| objective.value(&s)))
                },
                &theta0,
                &options,
            )
        }
        EstimatorKind::ControlVariates => {
            let emp_cov = empirical_covariance(series, p)?;
            let mut grid_stream =
                config.seed_plan.stream_for(config.replication, StreamPurpose::TGrid, 0);
            let t_grid = weight_sample(&config.weight, config.m, &mut grid_stream)?;
            let objective =
                CvObjective::new(&obs, &emp_cov, t_grid, config.k, config.variance_floor)?;
            let variates = model.draw_variates(&config.seed_plan, config.replication, config.h, p);
            minimize(
                |theta: &[f64]| {
                    or_inf(model.simulate_blocks(theta, &variates).and_then(|s| {
                        objective.value(&s, &model.moments(theta, p)?)
                    }))
                },
                &theta0,
                &options,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BlockKind, BlockSet, PathSimulator};

    fn ar1_path(seed: u64, len: usize) -> Vec<f64> {
        let sim = PathSimulator::new(ModelFamily::gaussian_ar1(), &[0.5, 1.0], len).unwrap();
        sim.simulate(&mut SeedPlan::new(seed).stream_for(0, StreamPurpose::Data, 0))
            .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ObjectiveConfig::default().validate().is_ok());
        let c = ObjectiveConfig {
            h: 2,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ObjectiveConfig {
            k: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ObjectiveConfig {
            m: 99,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ObjectiveConfig {
            p: 2,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in [
            EstimatorKind::Oracle,
            EstimatorKind::SimulationBased,
            EstimatorKind::ControlVariates,
        ] {
            assert_eq!(e.to_string().parse::<EstimatorKind>().unwrap(), e);
        }
        assert!("mle".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn oracle_rejected_for_counts() {
        let series: Vec<f64> = (0..50).map(|i| (i % 4) as f64).collect();
        let config = ObjectiveConfig::with_weight(WeightFamily::Gaussian, 1);
        let r = estimate(&series, &ModelFamily::poisson_ar1(), EstimatorKind::Oracle, &config);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn initial_guess_inside_box() {
        let series = ar1_path(3, 500);
        for model in [ModelFamily::gaussian_ar1(), ModelFamily::arfima()] {
            let theta = initial_guess(&series, &model).unwrap();
            assert!(model.parameter_vector(theta).is_ok());
        }
        let counts: Vec<f64> = (0..200).map(|i| ((i * 7) % 5) as f64).collect();
        let theta = initial_guess(&counts, &ModelFamily::poisson_ar1()).unwrap();
        assert!(ModelFamily::poisson_ar1().parameter_vector(theta).is_ok());
        assert_eq!(
            initial_guess(&[2.0; 20], &ModelFamily::gaussian_ar1()),
            Err(Error::DegenerateCovariance)
        );
    }

    #[test]
    fn oracle_recovers_ar1() {
        let series = ar1_path(11, 2000);
        let config = ObjectiveConfig::with_weight(WeightFamily::Gaussian, 5);
        let r = estimate(&series, &ModelFamily::gaussian_ar1(), EstimatorKind::Oracle, &config)
            .unwrap();
        let th = r.theta_hat.values();
        assert!((th[0] - 0.5).abs() < 0.1 && (th[1] - 1.0).abs() < 0.1, "{th:?}");
        assert!(r.converged);
    }

    #[test]
    fn simulation_based_is_deterministic() {
        let series = ar1_path(12, 300);
        let config = ObjectiveConfig {
            h: 200,
            ..ObjectiveConfig::with_weight(WeightFamily::Laplace, 9)
        };
        let model = ModelFamily::gaussian_ar1();
        let a = estimate(&series, &model, EstimatorKind::SimulationBased, &config).unwrap();
        let b = estimate(&series, &model, EstimatorKind::SimulationBased, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cv_self_match_is_zero() {
        let series = ar1_path(4, 300);
        let obs = make_blocks(&series, 3).unwrap();
        let sim = BlockSet::from_rows(obs.as_slice().to_vec(), 3, BlockKind::Simulated).unwrap();
        let emp = empirical_covariance(&series, 3).unwrap();
        let mut s = SeedPlan::new(1).stream_for(0, StreamPurpose::TGrid, 0);
        let grid = weight_sample(&WeightSpec::new(WeightFamily::Laplace, 3), 200, &mut s).unwrap();
        let objective = CvObjective::new(&obs, &emp, grid, 0.0, 1e-6).unwrap();
        let moments = ModelFamily::gaussian_ar1().moments(&[0.5, 1.0], 3).unwrap();
        assert_eq!(objective.value(&sim, &moments).unwrap(), 0.0);
    }
}
