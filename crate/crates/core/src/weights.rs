//! Weight densities `w` on `R^p` with closed-form Fourier transforms `w̃`.
//!
//! | family   | `w̃(x)`                       | sampler                                 |
//! |----------|------------------------------|-----------------------------------------|
//! | Laplace  | `1 / (1 + xᵀx / (2π²))`      | `√E · Z`, `E ~ Exp(1)`, `Z ~ N(0, I/π²)` |
//! | Cauchy   | `exp(−√(xᵀx))`               | `Z / √G`, `Z ~ N(0, I)`, `G ~ χ²(1)`     |
//! | Gaussian | `exp(−xᵀx / 2)`              | `Z ~ N(0, I)`                            |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightFamily {
    Laplace,
    Cauchy,
    Gaussian,
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightFamily::Laplace => "laplace",
            WeightFamily::Cauchy => "cauchy",
            WeightFamily::Gaussian => "gaussian",
        })
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laplace" => Ok(WeightFamily::Laplace),
            "cauchy" => Ok(WeightFamily::Cauchy),
            "gaussian" | "normal" => Ok(WeightFamily::Gaussian),
            other => Err(Error::Config(format!("unknown weight family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub dimension: usize,
}

impl WeightSpec {
    pub fn new(family: WeightFamily, dimension: usize) -> Self {
        Self { family, dimension }
    }

    /// `w̃` as a function of the squared norm `xᵀx`.
    #[inline]
    pub fn fourier_sq(&self, sq: f64) -> f64 {
        match self.family {
            WeightFamily::Laplace => 1.0 / (1.0 + sq / (2.0 * PI * PI)),
            WeightFamily::Cauchy => (-sq.sqrt()).exp(),
            WeightFamily::Gaussian => (-0.5 * sq).exp(),
        }
    }
}

/// Fourier transform `w̃(x) = ∫ e^{i⟨t,x⟩} w(t) dt`.
pub fn weight_fourier(spec: &WeightSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.dimension {
        return Err(Error::Dimension(format!(
            "weight of dimension {} evaluated at a point of dimension {}",
            spec.dimension,
            x.len()
        )));
    }
    Ok(spec.fourier_sq(x.iter().map(|v| v * v).sum()))
}

/// One draw `t ~ w`, written into `out`.
pub fn weight_draw<R: Rng + ?Sized>(spec: &WeightSpec, rng: &mut R, out: &mut [f64]) {
    for o in out.iter_mut() {
        *o = rng.sample(StandardNormal);
    }
    let scale = match spec.family {
        WeightFamily::Gaussian => 1.0,
        WeightFamily::Cauchy => {
            let g: f64 = rng.sample::<f64, _>(StandardNormal).powi(2);
            1.0 / g.sqrt()
        }
        WeightFamily::Laplace => {
            let e: f64 = rng.sample(Exp1);
            e.sqrt() / PI
        }
    };
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// `count` iid draws from `w`, row-major `count × p`.
pub fn weight_sample(spec: &WeightSpec, count: usize, stream: &mut Stream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Config("weight_sample needs count >= 1".into()));
    }
    let p = spec.dimension;
    let mut out = vec![0.0; count * p];
    for row in out.chunks_exact_mut(p) {
        weight_draw(spec, stream, row);
    }
    Ok(out)
}
