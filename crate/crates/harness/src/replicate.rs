//! Replication studies: bias, standard deviation and RMSE of the estimators
//! over independently simulated data sets.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chfsim_core::models::PathSimulator;
use chfsim_core::{estimate, EstimationResult, EstimatorKind, StreamPurpose};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::HarnessError;

/// Outcome of one estimator on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub estimator: EstimatorKind,
    pub outcome: Result<EstimationResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub param: &'static str,
    pub truth: f64,
    pub bias: f64,
    /// Standard deviation with divisor `R`, so that `rmse² = bias² + std²`.
    pub std: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub params: Vec<ParameterSummary>,
    pub successful: usize,
    pub failed: usize,
}

impl EstimatorSummary {
    pub fn param(&self, name: &str) -> Option<&ParameterSummary> {
        self.params.iter().find(|p| p.param == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicationRecord>,
    pub estimators: Vec<EstimatorSummary>,
}

impl ReplicationSummary {
    pub fn for_estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == kind)
    }

    /// Successful estimates of `kind`, one vector per replication.
    pub fn estimates(&self, kind: EstimatorKind) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .filter(|r| r.estimator == kind)
            .filter_map(|r| r.outcome.as_ref().ok())
            .map(|e| e.theta_hat.values().to_vec())
            .collect()
    }
}

/// `(bias, std, rmse)` of `estimates` around `truth`; NaN when empty.
pub fn moments_about(truth: f64, estimates: &[f64]) -> (f64, f64, f64) {
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / r;
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / r;
    (mean - truth, var.sqrt(), mse.sqrt())
}

fn summarize(config: &ExperimentConfig, records: &[ReplicationRecord]) -> Vec<EstimatorSummary> {
    let names = config.model.param_names();
    config
        .estimators
        .iter()
        .map(|&kind| {
            let mine: Vec<&ReplicationRecord> =
                records.iter().filter(|r| r.estimator == kind).collect();
            let ok: Vec<&EstimationResult> =
                mine.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let params = names
                .iter()
                .enumerate()
                .map(|(i, &param)| {
                    let col: Vec<f64> = ok.iter().map(|e| e.theta_hat.values()[i]).collect();
                    let (bias, std, rmse) = moments_about(config.theta[i], &col);
                    ParameterSummary {
                        param,
                        truth: config.theta[i],
                        bias,
                        std,
                        rmse,
                    }
                })
                .collect();
            EstimatorSummary {
                estimator: kind,
                params,
                successful: ok.len(),
                failed: mine.len() - ok.len(),
            }
        })
        .collect()
}

/// Runs every replication with a caller-supplied estimator. Replication `r`
/// draws its data path from the stream keyed `(r, Data, 0)` and estimates with
/// `objective.replication = r`. Replications run on the current rayon pool and
/// are aggregated in index order.
pub fn run_replications_with<F>(config: &ExperimentConfig, estimator: F) -> Result<ReplicationSummary, HarnessError>
where
    F: Fn(&[f64], EstimatorKind, &chfsim_core::ObjectiveConfig) -> chfsim_core::Result<EstimationResult> + Sync,
{
    config.validate()?;
    let simulator = PathSimulator::new(config.model, &config.theta, config.n)?;
    let plan = config.objective.seed_plan;
    let per_rep: Vec<Vec<ReplicationRecord>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let series = simulator.simulate(&mut plan.stream_for(r as u64, StreamPurpose::Data, 0));
            let objective = chfsim_core::ObjectiveConfig {
                replication: r as u64,
                ..config.objective
            };
            config
                .estimators
                .iter()
                .map(|&kind| ReplicationRecord {
                    replication: r,
                    estimator: kind,
                    outcome: series
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|x| estimator(x, kind, &objective).map_err(|e| e.to_string())),
                })
                .collect()
        })
        .collect();
    let records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();
    let estimators = summarize(config, &records);
    Ok(ReplicationSummary {
        config: config.clone(),
        records,
        estimators,
    })
}

/// [`run_replications_with`] using [`estimate`].
pub fn run_replications(config: &ExperimentConfig) -> Result<ReplicationSummary, HarnessError> {
    let model = config.model;
    run_replications_with(config, |x, kind, objective| estimate(x, &model, kind, objective))
}

fn clean(msg: &str) -> String {
    msg.replace([',', '\n', '"'], ";")
}

/// Per-replication CSV: one row per (replication, estimator).
pub fn replications_csv(summary: &ReplicationSummary) -> String {
    let names = summary.config.model.param_names();
    let mut out = String::from("replication,estimator,status");
    for n in names {
        write!(out, ",{n}").unwrap();
    }
    out.push_str(",objective,evaluations,converged,error\n");
    for rec in &summary.records {
        write!(out, "{},{}", rec.replication, rec.estimator).unwrap();
        match &rec.outcome {
            Ok(e) => {
                out.push_str(",ok");
                for v in e.theta_hat.values() {
                    write!(out, ",{v}").unwrap();
                }
                writeln!(out, ",{},{},{},", e.objective_value, e.evaluations, e.converged).unwrap();
            }
            Err(msg) => {
                out.push_str(",failed");
                for _ in names {
                    out.push(',');
                }
                writeln!(out, ",,,,{}", clean(msg)).unwrap();
            }
        }
    }
    out
}

/// Summary CSV with columns
/// `param,true,bias,std,rmse,estimator,n,H,p,k,weight,replications,failed`.
pub fn summary_csv(summary: &ReplicationSummary) -> String {
    let c = &summary.config;
    let mut out = String::from("param,true,bias,std,rmse,estimator,n,H,p,k,weight,replications,failed\n");
    for est in &summary.estimators {
        for p in &est.params {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                p.param,
                p.truth,
                p.bias,
                p.std,
                p.rmse,
                est.estimator,
                c.n,
                c.objective.h,
                c.objective.p,
                c.objective.k,
                c.objective.weight.family,
                est.successful,
                est.failed
            )
            .unwrap();
        }
    }
    out
}

/// Writes `replications.csv` and `summary.csv` into `dir` and returns their paths.
pub fn write_outputs(summary: &ReplicationSummary, dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    fs::create_dir_all(dir)?;
    let reps = dir.join("replications.csv");
    let summ = dir.join("summary.csv");
    fs::write(&reps, replications_csv(summary))?;
    fs::write(&summ, summary_csv(summary))?;
    Ok((reps, summ))
}
