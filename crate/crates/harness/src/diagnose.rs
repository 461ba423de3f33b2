//! Pointwise errors of the Monte Carlo and control-variate chf
//! approximations, for scatter plots against `√Var⟨t, X₁⟩`.

use std::fmt::Write as _;

use chfsim_core::chf::{cv_chf_batch, empirical_chf_batch, gaussian_chf};
use chfsim_core::models::BlockKind;
use chfsim_core::weights::weight_sample;
use chfsim_core::{BlockSet, ComplexValue, ModelFamily, Stream, WeightSpec};

use crate::HarnessError;

/// Blocks in the reference chf of models without a closed-form chf.
pub const REFERENCE_BLOCKS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub sqrt_var: f64,
    pub xi_mc: f64,
    pub xi_cv: f64,
}

fn draw_blocks(
    model: &ModelFamily,
    theta: &[f64],
    p: usize,
    count: usize,
    stream: &mut Stream,
) -> Result<BlockSet, HarnessError> {
    let mut data = Vec::with_capacity(count * p);
    for _ in 0..count {
        data.extend(model.sample_block(theta, p, stream)?);
    }
    Ok(BlockSet::from_rows(data, p, BlockKind::Simulated)?)
}

/// Draws `count` points `t ~ w`, then `h` iid simulated blocks, all from
/// `stream`, and reports `ξ_H = |φ_H − φ|` and `ξ_H^{(cv)} = |φ_H^{(cv)} − φ|`
/// at each `t`. The truth `φ` is the closed-form Gaussian chf where
/// available and otherwise the chf of [`REFERENCE_BLOCKS`] further blocks
/// drawn from `stream`.
pub fn chf_error_diagnostic(
    model: &ModelFamily,
    theta: &[f64],
    weight: &WeightSpec,
    count: usize,
    h: usize,
    stream: &mut Stream,
) -> Result<Vec<DiagnosticRow>, HarnessError> {
    let p = weight.dimension;
    let moments = model.moments(theta, p)?;
    let ts = weight_sample(weight, count, stream)?;
    let sim = draw_blocks(model, theta, p, h, stream)?;
    let mc = empirical_chf_batch(&sim, &ts)?;
    let cv = cv_chf_batch(&sim, &ts, &moments)?;
    let truth: Vec<ComplexValue> = if model.has_closed_form_chf() {
        ts.chunks_exact(p)
            .map(|t| gaussian_chf(t, &moments))
            .collect::<Result<_, _>>()?
    } else {
        let reference = draw_blocks(model, theta, p, REFERENCE_BLOCKS, stream)?;
        empirical_chf_batch(&reference, &ts)?
    };
    Ok(ts
        .chunks_exact(p)
        .enumerate()
        .map(|(i, t)| DiagnosticRow {
            sqrt_var: chfsim_core::linalg::quad_form(t, &moments.cov).sqrt(),
            xi_mc: (mc[i] - truth[i]).norm(),
            xi_cv: (cv[i].0 - truth[i]).norm(),
        })
        .collect())
}

pub fn diagnostic_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = String::from("sqrt_var,xi_mc,xi_cv\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.sqrt_var, r.xi_mc, r.xi_cv).unwrap();
    }
    out
}
