//! Empirical, Monte Carlo and control-variate corrected characteristic
//! functions.
//!
//! The control functions are the first two Taylor terms of `e^{i⟨t,x⟩}`,
//! centred by their exact expectations:
//! `h_1(x) = ⟨t,x⟩ − tᵀμ` and `h_2(x) = ⟨t,x⟩² − (tᵀμ)² − tᵀΣt`.
//! The corrected estimate is `P_H(f) − β̂ᵀ P_H(h)` with
//! `β̂ = Ĝ⁻¹ Ĉov(h, f)`, solved separately for the real and imaginary parts.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dot, quad_form};
use crate::models::{BlockMoments, BlockSet, CompactBlocks};

pub type ComplexValue = Complex64;

/// Gram matrices with `det ≤ SINGULAR_GRAM_RATIO · trace²` are treated as
/// singular and the plain Monte Carlo value is returned.
pub const SINGULAR_GRAM_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvDiagnostics {
    /// `β̂ = β̂_Re + i β̂_Im`.
    pub beta_hat: [Complex64; 2],
    /// `P_H(h)`, the sample mean of the control functions.
    pub control_mean: [f64; 2],
    /// Ratio of the extreme eigenvalues of the centred Gram matrix.
    pub gram_condition: f64,
    pub fallback_used: bool,
}

/// Borrowed view of blocks with optional multiplicities.
#[derive(Clone, Copy)]
pub(crate) struct Rows<'a> {
    pub data: &'a [f64],
    pub counts: Option<&'a [f64]>,
    pub p: usize,
    pub total: f64,
}

impl<'a> Rows<'a> {
    pub fn plain(blocks: &'a BlockSet) -> Self {
        Self {
            data: blocks.as_slice(),
            counts: None,
            p: blocks.p(),
            total: blocks.len() as f64,
        }
    }

    pub fn compact(blocks: &'a CompactBlocks) -> Self {
        Self {
            data: &blocks.rows,
            counts: Some(&blocks.counts),
            p: blocks.p,
            total: blocks.total,
        }
    }

    fn weight(&self, j: usize) -> f64 {
        self.counts.map_or(1.0, |c| c[j])
    }

    fn len(&self) -> usize {
        self.data.len() / self.p
    }
}

fn check_t(p: usize, t: &[f64]) -> Result<()> {
    if t.len() != p {
        return Err(Error::Dimension(format!(
            "argument of dimension {} for blocks of dimension {p}",
            t.len()
        )));
    }
    Ok(())
}

/// `(1/n) Σ_j c_j e^{i⟨t,x_j⟩}`.
pub(crate) fn chf_rows(rows: Rows<'_>, t: &[f64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (j, x) in rows.data.chunks_exact(rows.p).enumerate() {
        let (s, c) = dot(t, x).sin_cos();
        let w = rows.weight(j);
        re += w * c;
        im += w * s;
    }
    Complex64::new(re / rows.total, im / rows.total)
}

/// Empirical chf `φ_n(t) = (1/n) Σ_j e^{i⟨t,X_j⟩}` of observed blocks.
pub fn empirical_chf(blocks: &BlockSet, t: &[f64]) -> Result<ComplexValue> {
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    check_t(blocks.p(), t)?;
    Ok(chf_rows(Rows::plain(blocks), t))
}

/// Monte Carlo chf `φ_H(t,θ)` of simulated blocks; same computation as
/// [`empirical_chf`].
pub fn mc_chf(sim_blocks: &BlockSet, t: &[f64]) -> Result<ComplexValue> {
    empirical_chf(sim_blocks, t)
}

/// Chf at every row of the row-major `ts`. Results do not depend on how the
/// batch is split across threads.
pub fn empirical_chf_batch(blocks: &BlockSet, ts: &[f64]) -> Result<Vec<ComplexValue>> {
    if blocks.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let p = blocks.p();
    if ts.len() % p != 0 {
        return Err(Error::Dimension("t batch is not a multiple of p".into()));
    }
    let compact = CompactBlocks::from_block_set(blocks);
    Ok(chf_batch_rows(Rows::compact(&compact), ts))
}

pub(crate) fn chf_batch_rows(rows: Rows<'_>, ts: &[f64]) -> Vec<Complex64> {
    ts.par_chunks(rows.p).map(|t| chf_rows(rows, t)).collect()
}

/// Chf `exp(i tᵀμ − tᵀΣt/2)` of the Gaussian law with the given moments.
pub fn gaussian_chf(t: &[f64], moments: &BlockMoments) -> Result<ComplexValue> {
    check_t(moments.p(), t)?;
    let m = dot(t, moments.mean.as_slice());
    let v = quad_form(t, &moments.cov);
    Ok(Complex64::from_polar((-0.5 * v).exp(), m))
}

/// Control function values `(h_1(x), h_2(x))` at `t`.
pub fn control_values(t: &[f64], block_row: &[f64], moments: &BlockMoments) -> Result<[f64; 2]> {
    let p = moments.p();
    check_t(p, t)?;
    check_t(p, block_row)?;
    let (m1, m2) = control_expectations(t, moments);
    let s = dot(t, block_row);
    Ok([s - m1, s * s - m2])
}

/// `(E⟨t,X⟩, E⟨t,X⟩²)`.
pub(crate) fn control_expectations(t: &[f64], moments: &BlockMoments) -> (f64, f64) {
    let m1 = dot(t, moments.mean.as_slice());
    (m1, m1 * m1 + quad_form(t, &moments.cov))
}

/// Core control-variate computation given `E⟨t,X⟩` and `E⟨t,X⟩²`.
pub(crate) fn cv_rows(rows: Rows<'_>, t: &[f64], m1: f64, m2: f64) -> (Complex64, CvDiagnostics) {
    let n = rows.len();
    let total = rows.total;
    let mut s = Vec::with_capacity(n);
    let mut cs = Vec::with_capacity(n);
    let mut sn = Vec::with_capacity(n);
    let (mut ms, mut mq, mut mc, mut mn) = (0.0, 0.0, 0.0, 0.0);
    for (j, x) in rows.data.chunks_exact(rows.p).enumerate() {
        let w = rows.weight(j);
        let v = dot(t, x);
        let (si, co) = v.sin_cos();
        ms += w * v;
        mq += w * v * v;
        mc += w * co;
        mn += w * si;
        s.push(v);
        cs.push(co);
        sn.push(si);
    }
    ms /= total;
    mq /= total;
    mc /= total;
    mn /= total;
    let mc_value = Complex64::new(mc, mn);

    // Centred second moments of (s, s²) and their covariances with cos / sin.
    let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
    let (mut r1c, mut r2c, mut r1s, mut r2s) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let w = rows.weight(j);
        let a = s[j] - ms;
        let b = s[j] * s[j] - mq;
        let c = cs[j] - mc;
        let d = sn[j] - mn;
        g11 += w * a * a;
        g12 += w * a * b;
        g22 += w * b * b;
        r1c += w * a * c;
        r2c += w * b * c;
        r1s += w * a * d;
        r2s += w * b * d;
    }
    let inv = 1.0 / total;
    let (g11, g12, g22) = (g11 * inv, g12 * inv, g22 * inv);
    let control_mean = [ms - m1, mq - m2];

    let trace = g11 + g22;
    let det = g11 * g22 - g12 * g12;
    let t_is_zero = t.iter().all(|v| *v == 0.0);
    let singular = t_is_zero || !det.is_finite() || det <= SINGULAR_GRAM_RATIO * trace * trace;
    let gram_condition = if det > 0.0 {
        let half = 0.5 * trace;
        let disc = (half * half - det).max(0.0).sqrt();
        (half + disc) / (half - disc)
    } else {
        f64::INFINITY
    };
    if singular {
        return (
            mc_value,
            CvDiagnostics {
                beta_hat: [Complex64::new(0.0, 0.0); 2],
                control_mean,
                gram_condition,
                fallback_used: true,
            },
        );
    }

    let solve = |r1: f64, r2: f64| {
        let r1 = r1 * inv;
        let r2 = r2 * inv;
        [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
    };
    let b_re = solve(r1c, r2c);
    let b_im = solve(r1s, r2s);
    let kappa_re = b_re[0] * control_mean[0] + b_re[1] * control_mean[1];
    let kappa_im = b_im[0] * control_mean[0] + b_im[1] * control_mean[1];
    (
        Complex64::new(mc - kappa_re, mn - kappa_im),
        CvDiagnostics {
            beta_hat: [
                Complex64::new(b_re[0], b_im[0]),
                Complex64::new(b_re[1], b_im[1]),
            ],
            control_mean,
            gram_condition,
            fallback_used: false,
        },
    )
}

/// Control-variate corrected chf `φ_H^{(cv)}(t,θ)` of simulated blocks.
///
/// Falls back to [`mc_chf`] (with `fallback_used = true`) at `t = 0` and
/// whenever the centred Gram matrix of the controls is numerically singular.
pub fn cv_chf(
    sim_blocks: &BlockSet,
    t: &[f64],
    moments: &BlockMoments,
) -> Result<(ComplexValue, CvDiagnostics)> {
    if sim_blocks.len() < 3 {
        return Err(Error::TooFewBlocks(sim_blocks.len()));
    }
    check_t(sim_blocks.p(), t)?;
    if moments.p() != sim_blocks.p() {
        return Err(Error::Dimension(format!(
            "moments of dimension {} for blocks of dimension {}",
            moments.p(),
            sim_blocks.p()
        )));
    }
    let (m1, m2) = control_expectations(t, moments);
    Ok(cv_rows(Rows::plain(sim_blocks), t, m1, m2))
}

/// [`cv_chf`] at every row of `ts`.
pub fn cv_chf_batch(
    sim_blocks: &BlockSet,
    ts: &[f64],
    moments: &BlockMoments,
) -> Result<Vec<(ComplexValue, CvDiagnostics)>> {
    if sim_blocks.len() < 3 {
        return Err(Error::TooFewBlocks(sim_blocks.len()));
    }
    let p = sim_blocks.p();
    if ts.len() % p != 0 || moments.p() != p {
        return Err(Error::Dimension("inconsistent dimensions in cv batch".into()));
    }
    let compact = CompactBlocks::from_block_set(sim_blocks);
    let rows = Rows::compact(&compact);
    Ok(ts
        .par_chunks(p)
        .map(|t| {
            let (m1, m2) = control_expectations(t, moments);
            cv_rows(rows, t, m1, m2)
        })
        .collect())
}
