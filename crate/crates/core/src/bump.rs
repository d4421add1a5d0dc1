//! A low-degree trigonometric bump around the origin of the torus.
//!
//! `p(x) = q((Σ sin²(πx_i))/d)` where `q = a_k ∘ r`: `r` is a minimax
//! polynomial fit to a clipped ramp and `a_k` is a majority-vote amplifier.
//! Polynomials are stored as Chebyshev series on an explicit interval, which
//! keeps evaluation stable at degrees in the thousands.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::fourier::l1_count;
use crate::torus::{distance_unchecked, DiracComb, TorusPoint};
use crate::{Error, Result};

/// Points in the Remez reference grid (breakpoints are added on top).
pub const REMEZ_GRID: usize = 4096;
/// Largest degree tried for the ramp approximator.
pub const MAX_BASE_DEGREE: usize = 2048;
const RANGE_SLACK: f64 = 1e-9;

/// A polynomial as a Chebyshev series `Σ c_j T_j(s)` with `s` the affine
/// image of `[lo, hi]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePoly {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl UnivariatePoly {
    /// Trailing exact zeros are trimmed; at least one coefficient is kept.
    pub fn new(mut coeffs: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::OutOfRange(format!("domain [{lo}, {hi}]")));
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(Self { coeffs, lo, hi })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation; valid for any real `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let s = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs[0]
    }

    /// The degree-`n` interpolant of `f` at the first-kind Chebyshev nodes of
    /// `[lo, hi]`; exact when `f` is itself a polynomial of degree `≤ n`.
    pub fn interpolate(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = n + 1;
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        let values: Vec<f64> = (0..m)
            .map(|j| f(mid + half * (PI * (j as f64 + 0.5) / m as f64).cos()))
            .collect();
        // cos(π k (2j+1) / 2m) read from a table of 4m equally spaced angles
        let period = 4 * m;
        let table: Vec<f64> = (0..period)
            .map(|i| (2.0 * PI * i as f64 / period as f64).cos())
            .collect();
        let mut coeffs = vec![0.0; m];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut idx = k % period;
            let step = (2 * k) % period;
            for v in &values {
                acc += v * table[idx];
                idx = (idx + step) % period;
            }
            *c = acc * 2.0 / m as f64;
        }
        coeffs[0] /= 2.0;
        Self::new(coeffs, lo, hi)
    }

    /// `outer ∘ inner` by substitution, on the domain of `inner`.
    pub fn compose(outer: &UnivariatePoly, inner: &UnivariatePoly) -> Result<Self> {
        let n = outer.degree() * inner.degree();
        Self::interpolate(n, inner.lo, inner.hi, |x| outer.eval(inner.eval(x)))
    }

    /// Same polynomial read in the variable `y = scale · x`.
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        Self::new(self.coeffs.clone(), self.lo / scale, self.hi / scale)
    }
}

fn ln_factorials(k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    for i in 1..=k {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn amplifier_unchecked(k: usize, t: f64, lf: &[f64]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (lt, lu) = (t.ln(), (1.0 - t).ln());
    let h = k.div_ceil(2);
    let sum: f64 = (h..=k)
        .map(|j| (lf[k] - lf[j] - lf[k - j] + j as f64 * lt + (k - j) as f64 * lu).exp())
        .sum();
    sum.min(1.0)
}

/// Probability that `k` coins of bias `t` show at least `k/2` heads.
pub fn amplifier(k: usize, t: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::OutOfRange("amplifier needs k ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, 1]")));
    }
    Ok(amplifier_unchecked(k, t, &ln_factorials(k)))
}

/// `a_k` as an exact degree-`k` polynomial on `[0, 1]`.
pub fn amplifier_poly(k: usize) -> Result<UnivariatePoly> {
    if k == 0 {
        return Err(Error::OutOfRange("amplifier needs k ≥ 1".into()));
    }
    let lf = ln_factorials(k);
    UnivariatePoly::interpolate(k, 0.0, 1.0, |t| amplifier_unchecked(k, t, &lf))
}

/// Smallest `k` with `a_k(3/5) ≥ 1 - τ` and `a_k(2/5) ≤ τ`.
pub fn choose_k(tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::OutOfRange(format!("tau = {tau} outside (0, 1)")));
    }
    let mut k = 1;
    loop {
        let lf = ln_factorials(k);
        if amplifier_unchecked(k, 0.6, &lf) >= 1.0 - tau && amplifier_unchecked(k, 0.4, &lf) <= tau {
            return Ok(k);
        }
        k += 1;
    }
}

/// The clipped ramp: 1 on `[0, ℓ]`, linear down to 0 on `[ℓ, ℓ+1]`, then 0.
pub fn ramp(ell: f64, y: f64) -> f64 {
    (1.0 - (y - ell)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseFit {
    /// `r = (3/5)(p + 1/3)` on `[0, m]`.
    pub r: UnivariatePoly,
    /// `max |p - g|` on the verification grid.
    pub achieved_error: f64,
    pub degree: usize,
}

/// Chebyshev-spaced points on `[lo, hi]` plus `extra`, sorted.
fn cheb_grid(lo: f64, hi: f64, count: usize, extra: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = (0..count)
        .map(|i| {
            let th = PI * i as f64 / (count - 1) as f64;
            lo + (hi - lo) * (1.0 - th.cos()) / 2.0
        })
        .chain(extra.iter().copied().filter(|x| (lo..=hi).contains(x)))
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn cheb_row(s: f64, n: usize, row: &mut [f64]) {
    row[0] = 1.0;
    if n >= 1 {
        row[1] = s;
    }
    for j in 2..=n {
        row[j] = 2.0 * s * row[j - 1] - row[j - 2];
    }
}

/// Gaussian elimination with partial pivoting; `a` is row-major `n × n`.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let p = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[i * n + j] -= f * a[col * n + j];
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Some(x)
}

/// Discrete minimax fit of degree `n` to `target` over `grid` (Remez exchange).
fn remez(grid: &[f64], target: &[f64], n: usize, lo: f64, hi: f64) -> Result<UnivariatePoly> {
    let size = n + 2;
    if grid.len() < size {
        return Err(Error::OutOfRange(format!("degree {n} needs a finer grid")));
    }
    let to_unit = |x: f64| (2.0 * x - lo - hi) / (hi - lo);
    // initial reference near the Chebyshev extrema
    let mut refs: Vec<usize> = (0..size)
        .map(|i| {
            let s = -(PI * i as f64 / (size - 1) as f64).cos();
            let x = lo + (hi - lo) * (s + 1.0) / 2.0;
            grid.partition_point(|&g| g < x).min(grid.len() - 1)
        })
        .collect();
    for i in 1..size {
        if refs[i] <= refs[i - 1] {
            refs[i] = refs[i - 1] + 1;
        }
    }
    let overflow = refs[size - 1].saturating_sub(grid.len() - 1);
    if overflow > 0 {
        for (i, r) in refs.iter_mut().enumerate().rev() {
            *r = (*r).min(grid.len() - size + i);
        }
    }

    let mut row = vec![0.0; n + 1];
    let mut best: Option<(UnivariatePoly, f64)> = None;
    for _ in 0..80 {
        let mut a = vec![0.0; size * size];
        let mut b = vec![0.0; size];
        for (i, &gi) in refs.iter().enumerate() {
            cheb_row(to_unit(grid[gi]), n, &mut row);
            a[i * size..i * size + n + 1].copy_from_slice(&row);
            a[i * size + n + 1] = if i % 2 == 0 { 1.0 } else { -1.0 };
            b[i] = target[gi];
        }
        let Some(sol) = solve_dense(a, b, size) else {
            break;
        };
        let level = sol[n + 1].abs();
        let poly = UnivariatePoly::new(sol[..=n].to_vec(), lo, hi)?;
        let err: Vec<f64> = grid.iter().zip(target).map(|(&x, &t)| poly.eval(x) - t).collect();
        let max_err = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if best.as_ref().is_none_or(|(_, e)| max_err < *e) {
            best = Some((poly, max_err));
        }
        if max_err <= level * (1.0 + 1e-9) + 1e-15 {
            break;
        }
        // one extremum per run of constant sign
        let mut ext: Vec<usize> = Vec::new();
        for (i, &e) in err.iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            match ext.last() {
                Some(&j) if (err[j] > 0.0) == (e > 0.0) => {
                    if e.abs() > err[j].abs() {
                        *ext.last_mut().unwrap() = i;
                    }
                }
                _ => ext.push(i),
            }
        }
        if ext.len() < size {
            break;
        }
        while ext.len() > size {
            if ext.len() == size + 1 {
                if err[ext[0]].abs() < err[ext[ext.len() - 1]].abs() {
                    ext.remove(0);
                } else {
                    ext.pop();
                }
                continue;
            }
            let (i, _) = ext
                .iter()
                .enumerate()
                .min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs()))
                .unwrap();
            ext.remove(i);
            if i > 0 && i < ext.len() && (err[ext[i - 1]] > 0.0) == (err[ext[i]] > 0.0) {
                let drop = if err[ext[i - 1]].abs() < err[ext[i]].abs() { i - 1 } else { i };
                ext.remove(drop);
            }
        }
        refs = ext;
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::Numerical(format!("Remez system singular at degree {n}")))
}

fn sup_error(p: &UnivariatePoly, grid: &[f64], ell: f64) -> f64 {
    grid.iter()
        .map(|&y| (p.eval(y) - ramp(ell, y)).abs())
        .fold(0.0, f64::max)
}

/// Fit the ramp on `[0, m]` to uniform error `1/3` and return
/// `r = (3/5)(p + 1/3)`.
///
/// Starting at `degree_budget`, the degree doubles until the verification
/// grid passes, then bisects down to the smallest passing degree.
pub fn paturi_base(m: f64, ell: f64, degree_budget: usize) -> Result<BaseFit> {
    if degree_budget == 0 {
        return Err(Error::OutOfRange("degree budget must be positive".into()));
    }
    if !(ell >= 0.0 && ell + 1.0 <= m) {
        return Err(Error::OutOfRange(format!("need 0 ≤ ℓ and ℓ + 1 ≤ m, got ℓ = {ell}, m = {m}")));
    }
    let breaks = [0.0, ell, ell + 1.0, m];
    let grid = cheb_grid(0.0, m, REMEZ_GRID, &breaks);
    let target: Vec<f64> = grid.iter().map(|&y| ramp(ell, y)).collect();
    let mut verify = cheb_grid(0.0, m, 4 * REMEZ_GRID, &breaks);
    verify.extend((0..4 * REMEZ_GRID).map(|i| m * i as f64 / (4 * REMEZ_GRID - 1) as f64));
    verify.sort_by(f64::total_cmp);

    let fit = |n: usize| -> Result<(UnivariatePoly, f64)> {
        let p = remez(&grid, &target, n, 0.0, m)?;
        let e = sup_error(&p, &verify, ell);
        Ok((p, e))
    };

    let mut n = degree_budget.min(MAX_BASE_DEGREE);
    let mut failed_below = None;
    let mut best_err = f64::INFINITY;
    let (mut hi_n, mut hi_fit) = loop {
        let (p, e) = fit(n)?;
        best_err = best_err.min(e);
        if e <= 1.0 / 3.0 {
            break (n, (p, e));
        }
        failed_below = Some(n);
        if n >= MAX_BASE_DEGREE {
            return Err(Error::Verification(format!(
                "ramp fit reached degree cap {MAX_BASE_DEGREE} with error {best_err}"
            )));
        }
        n = (2 * n).min(MAX_BASE_DEGREE);
    };
    if let Some(mut lo_n) = failed_below {
        while hi_n - lo_n > 1 {
            let mid = (lo_n + hi_n) / 2;
            let (p, e) = fit(mid)?;
            if e <= 1.0 / 3.0 {
                hi_n = mid;
                hi_fit = (p, e);
            } else {
                lo_n = mid;
            }
        }
    }
    let (p, achieved_error) = hi_fit;
    let mut coeffs: Vec<f64> = p.coeffs().iter().map(|c| 0.6 * c).collect();
    coeffs[0] += 0.2;
    Ok(BaseFit {
        r: UnivariatePoly::new(coeffs, 0.0, m)?,
        achieved_error,
        degree: hi_n,
    })
}

/// Which pair `(A, b)` is used, by where `τ` sits relative to `0.6 ε_dist`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `0.6 ε_dist ≤ τ ≤ ε_dist`
    Far,
    /// `0 ≤ τ < 0.6 ε_dist`
    Near,
}

impl Regime {
    pub fn for_tau(tau: f64, eps_dist: f64) -> Self {
        if tau >= 0.6 * eps_dist {
            Regime::Far
        } else {
            Regime::Near
        }
    }

    /// `(A, b)`.
    pub fn constants(self, eps_dist: f64) -> (f64, f64) {
        let e2 = eps_dist * eps_dist;
        match self {
            Regime::Far => (PI * PI * e2, (3.2f64.powi(2) - PI * PI) * e2),
            Regime::Near => ((0.6 * PI).powi(2) * e2, (4.0 - (0.6 * PI).powi(2)) * e2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpPolynomial {
    pub q: UnivariatePoly,
    pub dim: usize,
    pub epsilon: f64,
    pub eps_dist: f64,
    pub regime: Regime,
    pub a: f64,
    pub b: f64,
    pub k: usize,
    pub base_degree: usize,
    pub base_error: f64,
}

impl BumpPolynomial {
    /// Total trigonometric degree of `p`.
    pub fn trig_degree(&self) -> usize {
        2 * self.q.degree()
    }

    /// Radius of the ball on which `p ≥ 1 - ε/2`.
    pub fn inner_radius(&self) -> f64 {
        self.a.sqrt() / PI
    }

    /// Distance beyond which `p ≤ ε/8`.
    pub fn outer_radius(&self) -> f64 {
        (self.a + self.b).sqrt() / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub property: String,
    pub x: f64,
    pub value: f64,
}

/// Check the three interval properties of `q` on a uniform grid of `[0, 1]`.
pub fn verify_q(b: &BumpPolynomial, points: usize) -> std::result::Result<(), GridFailure> {
    let (lo_edge, hi_edge) = (b.a / b.dim as f64, (b.a + b.b) / b.dim as f64);
    let xs = (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .chain([lo_edge, hi_edge].into_iter().filter(|x| *x <= 1.0));
    for x in xs {
        let v = b.q.eval(x);
        let fail = |property: &str| GridFailure {
            property: property.into(),
            x,
            value: v,
        };
        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
            return Err(fail("range"));
        }
        if x <= lo_edge && v < 1.0 - b.epsilon / 2.0 {
            return Err(fail("near"));
        }
        if x >= hi_edge && v > b.epsilon / 8.0 {
            return Err(fail("far"));
        }
    }
    Ok(())
}

/// Build `q = a_k ∘ r` for the given regime and verify it on a 4096-point grid.
pub fn build_q(epsilon: f64, eps_dist: f64, dim: usize, regime: Regime) -> Result<BumpPolynomial> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    if !(eps_dist > 0.0 && eps_dist < 1.0) {
        return Err(Error::OutOfRange(format!("eps_dist {eps_dist} outside (0, 1)")));
    }
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    let (a, b) = regime.constants(eps_dist);
    let d = dim as f64;
    if a + b >= d {
        return Err(Error::OutOfRange(format!(
            "(A + b)/d = {} ≥ 1: the far region is empty",
            (a + b) / d
        )));
    }
    // y = x·d/b sends [0, A/d] to [0, ℓ] and [(A+b)/d, 1] to [ℓ+1, m]
    let (m, ell) = (d / b, a / b);
    let k = choose_k(epsilon / 8.0)?;
    let outer = amplifier_poly(k)?;
    let mut budget = 1;
    loop {
        let base = paturi_base(m, ell, budget)?;
        let r_x = base.r.rescaled(d / b)?;
        let q = UnivariatePoly::compose(&outer, &r_x)?;
        let bump = BumpPolynomial {
            q,
            dim,
            epsilon,
            eps_dist,
            regime,
            a,
            b,
            k,
            base_degree: base.degree,
            base_error: base.achieved_error,
        };
        match verify_q(&bump, REMEZ_GRID) {
            Ok(()) => return Ok(bump),
            Err(f) if 2 * base.degree <= MAX_BASE_DEGREE => {
                let _ = f;
                budget = 2 * base.degree;
            }
            Err(f) => {
                return Err(Error::Verification(format!(
                    "property {} fails at x = {} (q = {})",
                    f.property, f.x, f.value
                )))
            }
        }
    }
}

/// `(Σ sin²(πx_i))/d`.
pub fn bump_argument(x: &[f64]) -> f64 {
    x.iter().map(|&c| (PI * c).sin().powi(2)).sum::<f64>() / x.len() as f64
}

pub fn eval_bump(b: &BumpPolynomial, x: &TorusPoint) -> Result<f64> {
    if x.dim() != b.dim {
        return Err(Error::DimensionMismatch {
            expected: b.dim,
            got: x.dim(),
        });
    }
    Ok(b.q.eval(bump_argument(x.coords())))
}

/// True when a bump value lies in `[0, 1]` up to rounding slack.
pub fn in_unit_range(v: f64) -> bool {
    (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v)
}

/// `E_{x∼D}[p(x)]`.
pub fn expectation_under_comb(b: &BumpPolynomial, d: &DiracComb) -> Result<f64> {
    if !d.is_nonnegative() {
        return Err(Error::NotDistribution("negative weight present".into()));
    }
    let mut acc = 0.0;
    for (x, w) in d.iter() {
        acc += w * eval_bump(b, x)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub samples: usize,
    pub passed: bool,
    /// Smallest value seen for lower-bound checks, largest for upper-bound ones.
    pub extreme: f64,
}

/// Uniform point on the sphere of radius `r` with every coordinate in `[-1/2, 1/2]`.
fn sphere_point(rng: &mut ChaCha20Rng, dim: usize, r: f64) -> Option<Vec<f64>> {
    for _ in 0..1000 {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let p: Vec<f64> = v.iter().map(|c| c * r / norm).collect();
        if p.iter().all(|c| c.abs() <= 0.5) {
            return Some(p);
        }
    }
    None
}

fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Pointwise checks of the bump on random and boundary points.
///
/// Range on uniform points; the lower bound inside the inner ball (including
/// its boundary sphere and the axis point); the upper bound outside the outer
/// radius (including points at exactly that distance).
pub fn verify_bump(b: &BumpPolynomial, samples: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = b.dim;
    let origin = vec![0.0; d];

    let mut lo_range = f64::INFINITY;
    let mut hi_range = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        let v = b.q.eval(bump_argument(&x));
        lo_range = lo_range.min(v);
        hi_range = hi_range.max(v);
    }
    let range_ok = in_unit_range(lo_range) && in_unit_range(hi_range);

    let r_in = b.inner_radius();
    let mut inner_min = f64::INFINITY;
    let mut inner_n = 0;
    let mut axis = origin.clone();
    axis[0] = r_in.min(0.5);
    let mut inner_pts = vec![origin.clone(), axis];
    for i in 0..samples {
        let radius = if i % 10 == 0 {
            r_in * (1.0 - 1e-12)
        } else {
            r_in * rng.gen::<f64>().powf(1.0 / d as f64)
        };
        if let Some(p) = sphere_point(&mut rng, d, radius.min(r_in)) {
            inner_pts.push(p);
        }
    }
    for p in inner_pts {
        let wrapped: Vec<f64> = p.iter().map(|c| crate::torus::wrap(*c)).collect();
        if distance_unchecked(&wrapped, &origin) > r_in {
            continue;
        }
        inner_n += 1;
        inner_min = inner_min.min(b.q.eval(bump_argument(&wrapped)));
    }

    let r_out = b.outer_radius();
    let mut outer_max = f64::NEG_INFINITY;
    let mut outer_n = 0;
    let mut outer_pts: Vec<Vec<f64>> = vec![vec![0.5; d]];
    let j = ((2.0 * r_out).powi(2).ceil() as usize).clamp(1, d);
    if r_out / (j as f64).sqrt() <= 0.5 {
        let mut p = vec![0.0; d];
        for c in p.iter_mut().take(j) {
            *c = r_out / (j as f64).sqrt();
        }
        outer_pts.push(p);
    }
    let mut tries = 0;
    while outer_pts.len() < samples + 2 && tries < 50 * samples {
        tries += 1;
        if outer_pts.len() % 10 == 0 {
            if let Some(p) = sphere_point(&mut rng, d, r_out) {
                outer_pts.push(p);
                continue;
            }
        }
        let x: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
        if distance_unchecked(&x, &origin) >= r_out {
            outer_pts.push(x);
        }
    }
    for p in outer_pts {
        let wrapped: Vec<f64> = p.iter().map(|c| crate::torus::wrap(*c)).collect();
        // rounding can pull a boundary point just inside the radius
        if distance_unchecked(&wrapped, &origin) < r_out * (1.0 - 1e-12) {
            continue;
        }
        outer_n += 1;
        outer_max = outer_max.max(b.q.eval(bump_argument(&wrapped)));
    }

    Ok(vec![
        PropertyCheck {
            name: "range".into(),
            samples,
            passed: range_ok,
            extreme: if lo_range < -hi_range + 1.0 { lo_range } else { hi_range },
        },
        PropertyCheck {
            name: "near".into(),
            samples: inner_n,
            passed: inner_n > 0 && inner_min >= 1.0 - b.epsilon / 2.0,
            extreme: inner_min,
        },
        PropertyCheck {
            name: "far".into(),
            samples: outer_n,
            passed: outer_n > 0 && outer_max <= b.epsilon / 8.0,
            extreme: outer_max,
        },
    ])
}

/// For random points at toroidal distance `≥ γ` from the origin, check
/// `4γ²/d ≤ (Σ sin²(πx_i))/d ≤ 1`. Returns `(points checked, all passed)`.
pub fn sandwich_check(dim: usize, gamma: f64, samples: usize, seed: u64) -> (usize, bool) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let origin = vec![0.0; dim];
    let lower = 4.0 * gamma * gamma / dim as f64;
    let mut checked = 0;
    let mut ok = true;
    let mut tries = 0;
    while checked < samples && tries < 100 * samples {
        tries += 1;
        let x: Vec<f64> = if checked % 10 == 0 {
            match sphere_point(&mut rng, dim, gamma) {
                Some(p) => p.iter().map(|c| crate::torus::wrap(*c)).collect(),
                None => continue,
            }
        } else {
            (0..dim).map(|_| rng.gen()).collect()
        };
        if distance_unchecked(&x, &origin) < gamma * (1.0 - 1e-12) {
            continue;
        }
        checked += 1;
        let s = bump_argument(&x);
        ok &= s >= lower * (1.0 - 1e-12) && s <= 1.0 + 1e-15;
    }
    (checked, ok)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub expectation_1: f64,
    pub expectation_2: f64,
    pub gap: f64,
    /// `|{ℓ : ‖ℓ‖₁ ≤ T}|`.
    pub index_count: f64,
    /// `κ · index_count`: the most the expectations can differ when every
    /// coefficient in the ball agrees to within `κ`.
    pub coefficient_slack: f64,
    /// True when `|gap|` exceeds the slack, so some coefficient must differ by more than `κ`.
    pub distinguished: bool,
    /// `ε/4 − κ·count`, the gap promised by a heavy-hitter violation.
    pub promised_gap: f64,
    /// Whether `κ` is small enough for the promised gap to beat the `ε/8` tail.
    pub kappa_suffices: bool,
}

/// Compare expectations of the bump under two distributions against the
/// coefficient-closeness slack over the `ℓ₁` ball of radius `degree_t`.
pub fn hh_certificate_gap(
    b: &BumpPolynomial,
    d1: &DiracComb,
    d2: &DiracComb,
    kappa: f64,
    degree_t: u32,
) -> Result<CertificateReport> {
    if (degree_t as usize) < b.trig_degree() {
        return Err(Error::OutOfRange(format!(
            "degree {degree_t} below the bump's trigonometric degree {}",
            b.trig_degree()
        )));
    }
    d1.require_distribution()?;
    d2.require_distribution()?;
    let e1 = expectation_under_comb(b, d1)?;
    let e2 = expectation_under_comb(b, d2)?;
    let count = l1_count(b.dim, degree_t) as f64;
    let slack = kappa * count;
    let promised = b.epsilon / 4.0 - slack;
    Ok(CertificateReport {
        expectation_1: e1,
        expectation_2: e2,
        gap: e1 - e2,
        index_count: count,
        coefficient_slack: slack,
        distinguished: (e1 - e2).abs() > slack,
        promised_gap: promised,
        kappa_suffices: promised > b.epsilon / 8.0,
    })
}
