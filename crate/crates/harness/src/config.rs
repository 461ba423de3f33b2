//! Experiment configuration in a flat `key = value` format.
//!
//! ```text
//! # Poisson-AR, D = 1
//! model = poisson-ar
//! theta = 0.150, 0.5, 0.619
//! n = 400
//! replications = 100
//! estimators = sim, cv
//! weight = laplace
//! seed = 7
//! out = results/poisson
//! ```
//!
//! Recognised keys: `model`, `innovation`, `theta`, `n`, `replications`,
//! `estimators`, `p`, `h`, `weight`, `k`, `m`, `variance_floor`, `seed`, `out`.
//! Unknown keys are an error.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chfsim_core::{EstimatorKind, Innovation, ModelFamily, ModelKind, ObjectiveConfig, SeedPlan, WeightFamily, WeightSpec};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelFamily,
    pub theta: Vec<f64>,
    /// Observed series length.
    pub n: usize,
    pub replications: usize,
    pub estimators: Vec<EstimatorKind>,
    pub objective: ObjectiveConfig,
    pub out: Option<PathBuf>,
    pub master_seed: u64,
}

const KEYS: [&str; 14] = [
    "model",
    "innovation",
    "theta",
    "n",
    "replications",
    "estimators",
    "p",
    "h",
    "weight",
    "k",
    "m",
    "variance_floor",
    "seed",
    "out",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("invalid value '{value}' for '{key}'")))
}

/// Comma-separated reals.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, HarnessError> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(HarnessError::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            if kv.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(HarnessError::Config(format!("duplicate key '{key}'")));
            }
        }
        let need = |k: &str| {
            kv.get(k)
                .map(String::as_str)
                .ok_or_else(|| HarnessError::Config(format!("missing key '{k}'")))
        };

        let kind: ModelKind = need("model")?.parse()?;
        let innovation: Innovation = match kv.get("innovation") {
            Some(v) => v.parse()?,
            None => Innovation::Gaussian,
        };
        let model = ModelFamily::new(kind, innovation)?;
        let theta = parse_list("theta", need("theta")?)?;
        let n = parse_num("n", need("n")?)?;
        let replications = parse_num("replications", need("replications")?)?;
        let estimators = need("estimators")?
            .split(',')
            .map(|e| e.parse::<EstimatorKind>())
            .collect::<Result<Vec<_>, _>>()?;
        let master_seed = match kv.get("seed") {
            Some(v) => parse_num("seed", v)?,
            None => 0,
        };

        let mut objective = ObjectiveConfig {
            seed_plan: SeedPlan::new(master_seed),
            ..ObjectiveConfig::default()
        };
        if let Some(v) = kv.get("p") {
            objective.p = parse_num("p", v)?;
        }
        if let Some(v) = kv.get("h") {
            objective.h = parse_num("h", v)?;
        }
        let family: WeightFamily = match kv.get("weight") {
            Some(v) => v.parse()?,
            None => objective.weight.family,
        };
        objective.weight = WeightSpec::new(family, objective.p);
        if let Some(v) = kv.get("k") {
            objective.k = parse_num("k", v)?;
        }
        if let Some(v) = kv.get("m") {
            objective.m = parse_num("m", v)?;
        }
        if let Some(v) = kv.get("variance_floor") {
            objective.variance_floor = parse_num("variance_floor", v)?;
        }

        let config = Self {
            model,
            theta,
            n,
            replications,
            estimators,
            objective,
            out: kv.get("out").map(PathBuf::from),
            master_seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(HarnessError::Config("no estimators given".into()));
        }
        if self.n < 2 * self.objective.p {
            return Err(HarnessError::Config(format!(
                "n = {} is too short for blocks of length {}",
                self.n, self.objective.p
            )));
        }
        self.objective.validate()?;
        let pv = self.model.parameter_vector(self.theta.clone())?;
        if !pv.contains(&self.theta) {
            return Err(HarnessError::Config("true parameter outside the estimation box".into()));
        }
        Ok(())
    }
}
