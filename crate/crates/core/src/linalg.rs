//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric Toeplitz matrix with first row `gamma`.
pub fn toeplitz(gamma: &[f64]) -> DMatrix<f64> {
    let p = gamma.len();
    DMatrix::from_fn(p, p, |i, j| gamma[i.abs_diff(j)])
}

/// Lower Cholesky factor, or [`Error::NotPositiveDefinite`].
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "cholesky of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite)
}

/// `tᵀ A t` for a square `A`.
pub fn quad_form(t: &[f64], a: &DMatrix<f64>) -> f64 {
    let p = t.len();
    debug_assert_eq!(a.nrows(), p);
    let mut acc = 0.0;
    for i in 0..p {
        let mut row = 0.0;
        for j in 0..p {
            row += a[(i, j)] * t[j];
        }
        acc += t[i] * row;
    }
    acc
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `L z` for lower-triangular `L`, written into `out`.
pub fn lower_mul(l: &DMatrix<f64>, z: &[f64], out: &mut [f64]) {
    let p = z.len();
    for i in 0..p {
        let mut acc = 0.0;
        for j in 0..=i {
            acc += l[(i, j)] * z[j];
        }
        out[i] = acc;
    }
}

pub fn to_vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
