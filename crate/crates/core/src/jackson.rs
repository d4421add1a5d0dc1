//! Jackson's kernel `J_n(x) = α_n · sin⁴(πnx) / sin⁴(πx)` and its tensor power.
//!
//! `α_n = 3 / (n(2n² + 1))` normalizes the kernel to unit mass. The Fourier
//! coefficients have an exact piecewise closed form and vanish for
//! `|ℓ| ≥ 2n - 1`, so the d-dimensional kernel is bandlimited.

use std::f64::consts::PI;

use rand::Rng;

use crate::fourier::{FourierTable, FrequencyIndex, IndexSet};
use crate::torus::{circle_distance, TorusPoint};
use crate::{Error, Result};

/// Grid resolution of the sampler's numeric CDF.
pub const SAMPLER_GRID: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonKernel {
    n: u32,
    dim: usize,
    alpha: f64,
}

/// `C(a, 3)`, zero when `a < 3`.
fn choose3(a: i64) -> f64 {
    if a < 3 {
        0.0
    } else {
        let a = a as f64;
        a * (a - 1.0) * (a - 2.0) / 6.0
    }
}

impl JacksonKernel {
    pub fn new(n: u32, dim: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("Jackson order n must be positive".into()));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            dim,
            alpha: 3.0 / (nf * (2.0 * nf * nf + 1.0)),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Peak value `J_n(0) = α_n n⁴`.
    pub fn peak(&self) -> f64 {
        self.alpha * (self.n as f64).powi(4)
    }

    pub fn eval_1d(&self, x: f64) -> f64 {
        let t = circle_distance(x, 0.0);
        let n = self.n as f64;
        let s = (PI * t).sin();
        if s.abs() < 1e-9 {
            // sin(πnt)/sin(πt) = n(1 - (n²-1)π²t²/6 + O(t⁴))
            let ratio = n * (1.0 - (n * n - 1.0) * PI * PI * t * t / 6.0);
            return self.alpha * ratio.powi(4);
        }
        let ratio = (PI * n * t).sin() / s;
        self.alpha * ratio.powi(4)
    }

    pub fn eval_nd(&self, x: &TorusPoint) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(x.coords().iter().map(|&c| self.eval_1d(c)).product())
    }

    /// Exact `Ĵ_n(ℓ)`; even in `ℓ`, in `[0,1]`, equal to 1 at `ℓ = 0`.
    pub fn fourier_1d(&self, l: i64) -> f64 {
        let l = l.abs();
        let n = self.n as i64;
        if l >= 2 * n - 1 {
            0.0
        } else if l >= n - 1 {
            self.alpha * choose3(2 * n + 1 - l)
        } else {
            self.alpha * (choose3(2 * n + 1 - l) - 4.0 * choose3(n + 1 - l))
        }
    }

    pub fn fourier_nd(&self, l: &FrequencyIndex) -> Result<f64> {
        self.check_dim(l.dim())?;
        Ok(self.fourier_nd_unchecked(l))
    }

    pub(crate) fn fourier_nd_unchecked(&self, l: &FrequencyIndex) -> f64 {
        l.entries().iter().map(|&e| self.fourier_1d(e)).product()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            })
        } else {
            Ok(())
        }
    }

    /// Lipschitz constant `3πn²(3n/2)^{d-1}√d` of the d-dimensional kernel.
    pub fn lipschitz_bound(&self) -> f64 {
        let n = self.n as f64;
        3.0 * PI * n * n * (1.5 * n).powi(self.dim as i32 - 1) * (self.dim as f64).sqrt()
    }

    pub fn sampler(&self) -> JacksonSampler {
        JacksonSampler::new(*self)
    }
}

/// Multiply every coefficient by `Ĵ_{d,n}(ℓ)`.
pub fn smooth_table(u: &FourierTable, k: &JacksonKernel) -> Result<FourierTable> {
    if !matches!(u.index_set(), IndexSet::LinfBall { .. }) {
        return Err(Error::OutOfRange("smoothing expects an l-infinity index set".into()));
    }
    k.check_dim(u.dim())?;
    Ok(u.map_values(|l, v| v * k.fourier_nd_unchecked(l)))
}

/// Inverse-CDF sampler for `J_{d,n}`, one independent draw per coordinate.
///
/// The CDF is tabulated once by trapezoid integration on a uniform grid and
/// inverted by binary search with linear interpolation.
#[derive(Debug, Clone)]
pub struct JacksonSampler {
    kernel: JacksonKernel,
    cdf: Vec<f64>,
}

impl JacksonSampler {
    fn new(kernel: JacksonKernel) -> Self {
        let h = 1.0 / SAMPLER_GRID as f64;
        let mut cdf = Vec::with_capacity(SAMPLER_GRID + 1);
        cdf.push(0.0);
        let mut prev = kernel.eval_1d(0.0);
        let mut acc = 0.0;
        for i in 1..=SAMPLER_GRID {
            let cur = kernel.eval_1d(i as f64 * h);
            acc += 0.5 * (prev + cur) * h;
            cdf.push(acc);
            prev = cur;
        }
        let total = acc;
        for v in cdf.iter_mut() {
            *v /= total;
        }
        Self { kernel, cdf }
    }

    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    pub fn sample_1d<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, SAMPLER_GRID);
        let (lo, hi) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
        ((i - 1) as f64 + frac) / SAMPLER_GRID as f64
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        TorusPoint::new(
            (0..self.kernel.dim)
                .map(|_| self.sample_1d(rng))
                .collect::<Vec<_>>(),
        )
    }
}
