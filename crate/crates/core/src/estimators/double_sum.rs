//! The simulation-based objective `Q_{n,H}(θ) = ∫ |φ_n − φ_H|² w` written as
//! double sums of the weight transform `w̃` over pairs of blocks, which avoids
//! any numerical integration:
//!
//! `Q = (1/n²) ΣΣ w̃(X_j − X_k) + (1/H²) ΣΣ w̃(X̃_j − X̃_k) − (2/(Hn)) ΣΣ w̃(X_j − X̃_k)`.
//!
//! The cross term uses the symmetry `w̃(x) = w̃(−x)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{BlockSet, CompactBlocks};
use crate::weights::WeightSpec;

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `(1/N²) Σ_j Σ_k c_j c_k w̃(x_j − x_k)`.
pub(crate) fn self_term(blocks: &CompactBlocks, weight: &WeightSpec) -> f64 {
    let m = blocks.distinct();
    let diag: f64 = blocks.counts.iter().map(|c| c * c).sum::<f64>() * weight.fourier_sq(0.0);
    let upper: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let xj = blocks.row(j);
            let mut acc = 0.0;
            for k in j + 1..m {
                acc += blocks.counts[k] * weight.fourier_sq(sq_dist(xj, blocks.row(k)));
            }
            blocks.counts[j] * acc
        })
        .collect();
    let off: f64 = upper.iter().sum();
    (diag + 2.0 * off) / (blocks.total * blocks.total)
}

/// `(1/(N M)) Σ_j Σ_k c_j d_k w̃(x_j − y_k)`.
pub(crate) fn cross_term(a: &CompactBlocks, b: &CompactBlocks, weight: &WeightSpec) -> f64 {
    let parts: Vec<f64> = (0..a.distinct())
        .into_par_iter()
        .map(|j| {
            let xj = a.row(j);
            let mut acc = 0.0;
            for k in 0..b.distinct() {
                acc += b.counts[k] * weight.fourier_sq(sq_dist(xj, b.row(k)));
            }
            a.counts[j] * acc
        })
        .collect();
    parts.iter().sum::<f64>() / (a.total * b.total)
}

fn check(obs: &BlockSet, sim: &BlockSet, weight: &WeightSpec) -> Result<()> {
    if obs.is_empty() || sim.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    if obs.p() != sim.p() || obs.p() != weight.dimension {
        return Err(Error::Dimension(format!(
            "observed p = {}, simulated p = {}, weight dimension = {}",
            obs.p(),
            sim.p(),
            weight.dimension
        )));
    }
    Ok(())
}

/// `Q_{n,H}` from observed and simulated blocks.
pub fn q_nh(obs_blocks: &BlockSet, sim_blocks: &BlockSet, weight: &WeightSpec) -> Result<f64> {
    check(obs_blocks, sim_blocks, weight)?;
    Ok(DoubleSumObjective::new(obs_blocks, *weight)?.value(sim_blocks))
}

/// `Q_{n,H}` with the observed-only term computed once per data set.
#[derive(Debug, Clone)]
pub struct DoubleSumObjective {
    obs: CompactBlocks,
    weight: WeightSpec,
    observed_term: f64,
}

impl DoubleSumObjective {
    pub fn new(obs_blocks: &BlockSet, weight: WeightSpec) -> Result<Self> {
        if obs_blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        if obs_blocks.p() != weight.dimension {
            return Err(Error::Dimension(format!(
                "observed p = {} with weight dimension {}",
                obs_blocks.p(),
                weight.dimension
            )));
        }
        let obs = CompactBlocks::from_block_set(obs_blocks);
        let observed_term = self_term(&obs, &weight);
        Ok(Self {
            obs,
            weight,
            observed_term,
        })
    }

    /// The θ-free term `(1/n²) ΣΣ w̃(X_j − X_k)`.
    pub fn observed_term(&self) -> f64 {
        self.observed_term
    }

    /// `Q_{n,H}` minus the observed term; has the same minimisers in θ.
    pub fn value_without_observed_term(&self, sim_blocks: &BlockSet) -> f64 {
        debug_assert_eq!(sim_blocks.p(), self.weight.dimension);
        let sim = CompactBlocks::from_block_set(sim_blocks);
        self_term(&sim, &self.weight) - 2.0 * cross_term(&self.obs, &sim, &self.weight)
    }

    pub fn value(&self, sim_blocks: &BlockSet) -> f64 {
        (self.observed_term + self.value_without_observed_term(sim_blocks)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BlockKind;
    use crate::weights::{weight_fourier, WeightFamily};

    fn blocks(data: Vec<f64>, p: usize) -> BlockSet {
        BlockSet::from_rows(data, p, BlockKind::Simulated).unwrap()
    }

    #[test]
    fn identical_single_blocks_give_zero() {
        let w = WeightSpec::new(WeightFamily::Laplace, 3);
        let x = blocks(vec![0.3, -1.0, 2.0], 3);
        assert_eq!(q_nh(&x, &x, &w).unwrap(), 0.0);
    }

    #[test]
    fn distinct_single_blocks() {
        for f in [WeightFamily::Laplace, WeightFamily::Cauchy, WeightFamily::Gaussian] {
            let w = WeightSpec::new(f, 2);
            let x = blocks(vec![0.3, -1.0], 2);
            let y = blocks(vec![1.3, 0.5], 2);
            let expect = 2.0 * (1.0 - weight_fourier(&w, &[-1.0, -1.5]).unwrap());
            let q = q_nh(&x, &y, &w).unwrap();
            assert!((q - expect).abs() < 1e-14);
            assert!(q > 0.0);
        }
    }

    #[test]
    fn brute_force_double_sum() {
        let w = WeightSpec::new(WeightFamily::Gaussian, 2);
        let x = blocks(vec![0.0, 1.0, 1.0, 1.0, 0.5, -0.5], 2);
        let y = blocks(vec![1.0, 1.0, 2.0, 0.0, 1.0, 1.0, -1.0, 0.0], 2);
        let wt = |a: &[f64], b: &[f64]| {
            let d: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
            weight_fourier(&w, &d).unwrap()
        };
        let (n, h) = (x.len() as f64, y.len() as f64);
        let mut expect = 0.0;
        for a in x.rows() {
            for b in x.rows() {
                expect += wt(a, b) / (n * n);
            }
        }
        for a in y.rows() {
            for b in y.rows() {
                expect += wt(a, b) / (h * h);
            }
        }
        for a in x.rows() {
            for b in y.rows() {
                expect -= (wt(a, b) + wt(b, a)) / (n * h);
            }
        }
        assert!((q_nh(&x, &y, &w).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let w = WeightSpec::new(WeightFamily::Gaussian, 2);
        let x = blocks(vec![0.0, 1.0], 2);
        let y = blocks(vec![0.0, 1.0, 2.0], 3);
        assert!(matches!(q_nh(&x, &y, &w), Err(Error::Dimension(_))));
    }
}
