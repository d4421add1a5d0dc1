//! Hard instance pairs.
//!
//! * Shifted grids whose low coefficients agree exactly but which sit far apart.
//! * Random well-separated point sets smoothed by Jackson's kernel.
//! * A one-dimensional pair differing only at odd frequencies.
//! * Mixtures of product distributions on `{-1,1}^d` whose mixing weights
//!   come from a polynomial with a high-order root at 1, embedded in the torus
//!   on the lattice `{0, 1/2}^d`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::fourier::{comb_fourier_unchecked, enumerate_linf_capped};
use crate::jackson::JacksonKernel;
use crate::lp::{LinearProgram, Relation, Sense, Status};
use crate::torus::{distance_unchecked, grid_comb, DiracComb, TorusPoint};
use crate::{Error, FrequencyIndex, Result};

/// Largest cube dimension that is tabulated point by point.
pub const MAX_TABULATED_DIM: usize = 20;
/// Largest frequency set swept by the exhaustive condition checks.
pub const MAX_SWEEP: usize = 1 << 22;
/// Grid size of the sup-norm check.
pub const BEK_GRID: usize = 1 << 14;

const LP_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// shifted grids

/// Uniform grid of side `T' = ⌊√d/(2ε)⌋` and the same grid shifted by `1/(2T')`
/// in every coordinate.
pub fn grid_pair(dim: usize, epsilon: f64) -> Result<(DiracComb, DiracComb, usize)> {
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    let side = ((dim as f64).sqrt() / (2.0 * epsilon)).floor() as usize;
    if side == 0 {
        return Err(Error::OutOfRange(format!(
            "epsilon {epsilon} too large for d = {dim}: grid side is 0"
        )));
    }
    let d1 = grid_comb(dim, side, 0.0)?;
    let d2 = grid_comb(dim, side, 0.5 / side as f64)?;
    Ok((d1, d2, side))
}

/// Smallest toroidal distance between a point of `a` and a point of `b`.
pub fn min_cross_distance(a: &[TorusPoint], b: &[TorusPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for x in a {
        for y in b {
            best = best.min(distance_unchecked(x.coords(), y.coords()));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// random separated sets

/// Sizes for the random construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatedConfig {
    /// Points per side.
    pub m: usize,
    /// Jackson degree.
    pub n: u32,
    pub kappa: f64,
}

impl SeparatedConfig {
    /// `κ = ε^{0.249d}`, `M = ⌈(8ε)^{-d/2}/2⌉`, `n = ⌈4√d/ε⌉`.
    pub fn for_defaults(dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 || !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::OutOfRange(format!("d = {dim}, epsilon = {epsilon}")));
        }
        let d = dim as f64;
        let m = (0.5 * (8.0 * epsilon).powf(-0.5 * d)).ceil();
        if !(m.is_finite() && m < 1e9) {
            return Err(Error::OutOfRange(format!("point count {m} too large")));
        }
        Ok(Self {
            m: (m as usize).max(1),
            n: (4.0 * d.sqrt() / epsilon).ceil() as u32,
            kappa: epsilon.powf(0.249 * d),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedPair {
    pub dim: usize,
    pub epsilon: f64,
    pub xs: Vec<TorusPoint>,
    pub ys: Vec<TorusPoint>,
    pub config: SeparatedConfig,
    pub seed: u64,
    /// Number of samples drawn, including the accepted one.
    pub attempts: usize,
}

/// Outcome of the exhaustive checks on one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub min_cross_distance: f64,
    /// All cross distances exceed `4ε`.
    pub separated: bool,
    pub max_sum_x: f64,
    pub max_sum_y: f64,
    pub argmax_x: FrequencyIndex,
    pub argmax_y: FrequencyIndex,
    /// Both normalized exponential sums stay below `κ/2` on `0 < ‖ℓ‖∞ < 2n`.
    pub sums_small: bool,
}

impl SeparationReport {
    pub fn holds(&self) -> bool {
        self.separated && self.sums_small
    }
}

fn uniform_comb(dim: usize, points: &[TorusPoint]) -> Result<DiracComb> {
    let w = 1.0 / points.len() as f64;
    DiracComb::new(dim, points.to_vec(), vec![w; points.len()])
}

fn nonzero_sweep(dim: usize, n: u32) -> Result<Vec<FrequencyIndex>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut ls = enumerate_linf_capped(dim, 2 * n - 1, MAX_SWEEP)?;
    ls.retain(|l| !l.is_zero());
    Ok(ls)
}

fn max_sum(c: &DiracComb, sweep: &[FrequencyIndex]) -> (FrequencyIndex, f64) {
    let mut best = (FrequencyIndex::zero(c.dim()), 0.0);
    for l in sweep {
        let v = comb_fourier_unchecked(c, l).norm();
        if v > best.1 {
            best = (l.clone(), v);
        }
    }
    best
}

/// Check both conditions on explicit point sets.
pub fn check_separation(
    dim: usize,
    epsilon: f64,
    xs: &[TorusPoint],
    ys: &[TorusPoint],
    config: &SeparatedConfig,
) -> Result<SeparationReport> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyComb);
    }
    let sweep = nonzero_sweep(dim, config.n)?;
    let cx = uniform_comb(dim, xs)?;
    let cy = uniform_comb(dim, ys)?;
    let min_cross = min_cross_distance(xs, ys);
    let (ax, mx) = max_sum(&cx, &sweep);
    let (ay, my) = max_sum(&cy, &sweep);
    Ok(SeparationReport {
        min_cross_distance: min_cross,
        separated: min_cross > 4.0 * epsilon,
        max_sum_x: mx,
        max_sum_y: my,
        argmax_x: ax,
        argmax_y: ay,
        sums_small: mx < config.kappa / 2.0 && my < config.kappa / 2.0,
    })
}

/// Sample `2M` uniform points until both conditions hold.
///
/// `config = None` uses [`SeparatedConfig::for_defaults`].
pub fn random_separated_pair(
    dim: usize,
    epsilon: f64,
    seed: u64,
    max_retries: usize,
    config: Option<SeparatedConfig>,
) -> Result<SeparatedPair> {
    let config = match config {
        Some(c) => c,
        None => SeparatedConfig::for_defaults(dim, epsilon)?,
    };
    if dim == 0 || config.m == 0 || config.n == 0 || !(epsilon > 0.0) {
        return Err(Error::OutOfRange("need d, M, n and epsilon positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha20Rng| -> Vec<TorusPoint> {
        (0..config.m)
            .map(|_| TorusPoint::new((0..dim).map(|_| rng.gen::<f64>()).collect::<Vec<_>>()))
            .collect()
    };
    let (mut fail_sep, mut fail_sums) = (0usize, 0usize);
    let mut closest = 0.0f64;
    let attempts = max_retries.max(1);
    for attempt in 1..=attempts {
        let xs = sample(&mut rng);
        let ys = sample(&mut rng);
        let report = check_separation(dim, epsilon, &xs, &ys, &config)?;
        if report.holds() {
            return Ok(SeparatedPair {
                dim,
                epsilon,
                xs,
                ys,
                config,
                seed,
                attempts: attempt,
            });
        }
        closest = closest.max(report.min_cross_distance);
        fail_sep += usize::from(!report.separated);
        fail_sums += usize::from(!report.sums_small);
    }
    let worst = if fail_sep >= fail_sums {
        "separation"
    } else {
        "exponential sums"
    };
    Err(Error::RetriesExhausted {
        attempts,
        detail: format!(
            "most frequent failure: {worst} (separation failed {fail_sep}, sums failed {fail_sums}); \
             best cross distance {closest:.4} vs required > {:.4}",
            4.0 * epsilon
        ),
    })
}

impl SeparatedPair {
    pub fn report(&self) -> Result<SeparationReport> {
        check_separation(self.dim, self.epsilon, &self.xs, &self.ys, &self.config)
    }

    pub fn kernel(&self) -> Result<JacksonKernel> {
        JacksonKernel::new(self.config.n, self.dim)
    }

    /// Coefficient of `(uniform on xs) * J` (`first`) or the `ys` side.
    pub fn smoothed_coefficient(&self, first: bool, l: &FrequencyIndex) -> Result<Complex64> {
        let k = self.kernel()?;
        let pts = if first { &self.xs } else { &self.ys };
        let c = uniform_comb(self.dim, pts)?;
        Ok(comb_fourier_unchecked(&c, l) * k.fourier_nd(l)?)
    }
}

/// `Ĵ(ℓ)·(x̂(ℓ) − ŷ(ℓ))` for the smoothed pair.
pub fn lb_infinite_fourier_diff(pair: &SeparatedPair, l: &FrequencyIndex) -> Result<Complex64> {
    let k = pair.kernel()?;
    let j = k.fourier_nd(l)?;
    if j == 0.0 || l.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cx = uniform_comb(pair.dim, &pair.xs)?;
    let cy = uniform_comb(pair.dim, &pair.ys)?;
    Ok((comb_fourier_unchecked(&cx, l) - comb_fourier_unchecked(&cy, l)) * j)
}

/// Largest `|lb_infinite_fourier_diff|` over `0 < ‖ℓ‖∞ < 2n`.
pub fn max_lb_infinite_diff(pair: &SeparatedPair) -> Result<(FrequencyIndex, f64)> {
    let mut best = (FrequencyIndex::zero(pair.dim), 0.0);
    for l in nonzero_sweep(pair.dim, pair.config.n)? {
        let v = lb_infinite_fourier_diff(pair, &l)?.norm();
        if v > best.1 {
            best = (l, v);
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// one dimension

/// `δ_0` and `(1-2ε)δ_0 + 2ε δ_{1/2}`.
pub fn one_dim_pair(epsilon: f64) -> Result<(DiracComb, DiracComb)> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} outside (0, 1/4)")));
    }
    let d1 = DiracComb::dirac(TorusPoint::new(vec![0.0]));
    let d2 = DiracComb::from_coords(
        1,
        &[vec![0.0], vec![0.5]],
        &[1.0 - 2.0 * epsilon, 2.0 * epsilon],
    )?;
    Ok((d1, d2))
}

// ---------------------------------------------------------------------------
// polynomials with a high-order root at 1

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Coefficients of `(1-x)^k`.
fn root_factor(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|i| if i % 2 == 0 { binomial(k, i) } else { -binomial(k, i) })
        .collect()
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `A(x) = (1-x)^k B(x)` of degree `d` with `Σ|a_j| = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErdelyiPoly {
    /// `a_0..a_d`.
    pub coefficients: Vec<f64>,
    pub k: usize,
    /// Cofactor `B`, degree `d - k`.
    pub b_coefficients: Vec<f64>,
    /// `|a_0| / Σ_{j≥1}|a_j|`.
    pub ratio: f64,
}

impl ErdelyiPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Evaluation through the factored form.
    pub fn eval(&self, x: f64) -> f64 {
        let b = self.b_coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c);
        (1.0 - x).powi(self.k as i32) * b
    }

    /// Horner on the expanded coefficients.
    pub fn eval_expanded(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|a| a.abs()).sum()
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Largest gap between `a` and the expansion of `(1-x)^k B`.
    pub fn factorization_error(&self) -> f64 {
        convolve(&root_factor(self.k), &self.b_coefficients)
            .iter()
            .zip(&self.coefficients)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Quotient of `a(x)` by `(1-x)`, dropping the remainder.
fn deflate(a: &[f64]) -> Vec<f64> {
    // a = (x-1)q + r, highest coefficient first
    let n = a.len() - 1;
    let mut q = vec![0.0; n];
    let mut carry = 0.0;
    for j in (1..=n).rev() {
        carry += a[j];
        q[j - 1] = -carry;
    }
    q
}

/// Maximize `a_0` over degree-`d` polynomials `(1-x)^k B(x)` with `Σ|a_j| ≤ 2`.
///
/// The program runs on split coefficients `a = a⁺ - a⁻` with the root
/// condition written as vanishing moments `Σ_j (j/d)^i a_j = 0`, `i < k`,
/// which keeps every variable in `[0, 2]`. `B` is then recovered by repeated
/// division and the expansion rescaled to `Σ|a_j| = 2`.
pub fn erdelyi_poly(d: usize, k: usize) -> Result<ErdelyiPoly> {
    if k == 0 || k > d {
        return Err(Error::OutOfRange(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let na = d + 1;
    let mut lp = LinearProgram::new(2 * na);
    let mut obj = vec![0.0; 2 * na];
    obj[0] = 1.0;
    obj[na] = -1.0;
    lp.set_objective(Sense::Maximize, obj)?;
    for i in 0..k {
        let mut row = Vec::with_capacity(2 * na);
        for j in 0..na {
            let c = (j as f64 / d as f64).powi(i as i32);
            row.push((j, c));
            row.push((na + j, -c));
        }
        lp.add_sparse(&row, Relation::Eq, 0.0)?;
    }
    let budget: Vec<(usize, f64)> = (0..2 * na).map(|j| (j, 1.0)).collect();
    lp.add_sparse(&budget, Relation::Le, 2.0)?;

    let sol = lp.solve(LP_TOL)?;
    if sol.status == Status::Infeasible {
        return Err(Error::Infeasible("root-at-one polynomial program".into()));
    }
    let x = &sol.assignment;
    let mut b: Vec<f64> = (0..na).map(|j| x[j] - x[na + j]).collect();
    for _ in 0..k {
        b = deflate(&b);
    }
    let factor = root_factor(k);
    let norm: f64 = convolve(&factor, &b).iter().map(|x| x.abs()).sum();
    if !(norm > 0.0) {
        return Err(Error::Numerical("optimal polynomial is zero".into()));
    }
    let scale = 2.0 / norm;
    b.iter_mut().for_each(|x| *x *= scale);
    let a = convolve(&factor, &b);
    let tail: f64 = a[1..].iter().map(|x| x.abs()).sum();
    Ok(ErdelyiPoly {
        ratio: a[0].abs() / tail,
        coefficients: a,
        k,
        b_coefficients: b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BekReport {
    pub interval_lo: f64,
    /// `sup |A(x)|/2` on the grid over `[interval_lo, 1]`.
    pub sup: f64,
    /// `(d+1)(e/9)^k`.
    pub bound: f64,
    /// Whether `interval_lo` is the natural endpoint `1 - k/(9d)`.
    pub natural_interval: bool,
    pub holds: bool,
}

/// `1 - k/(9d)`.
pub fn bek_interval_lo(d: usize, k: usize) -> f64 {
    1.0 - k as f64 / (9.0 * d as f64)
}

/// Grid sup of `|A|/2` on `[interval_lo, 1]` against `(d+1)(e/9)^k`.
pub fn bek_supnorm_check(p: &ErdelyiPoly, interval_lo: f64) -> Result<BekReport> {
    if !(interval_lo > 0.0 && interval_lo < 1.0) {
        return Err(Error::OutOfRange(format!("interval start {interval_lo} outside (0, 1)")));
    }
    let d = p.degree();
    let mut sup = 0.0f64;
    for i in 0..BEK_GRID {
        let x = interval_lo + (1.0 - interval_lo) * i as f64 / (BEK_GRID - 1) as f64;
        sup = sup.max(p.eval(x).abs() / 2.0);
    }
    let bound = (d + 1) as f64 * (std::f64::consts::E / 9.0).powi(p.k as i32);
    Ok(BekReport {
        interval_lo,
        sup,
        bound,
        natural_interval: (interval_lo - bek_interval_lo(d, p.k)).abs() < 1e-15,
        holds: sup <= bound,
    })
}

// ---------------------------------------------------------------------------
// product mixtures on the cube

/// Mixture of i.i.d. product distributions with `E[x_i] = e^{-t_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeMixture {
    pub dim: usize,
    pub weights: Vec<f64>,
    /// `t_j = j·γ`.
    pub rates: Vec<f64>,
    pub gamma: f64,
}

impl CubeMixture {
    pub fn new(dim: usize, weights: Vec<f64>, gamma: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyComb);
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::OutOfRange(format!("gamma {gamma}")));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::NotDistribution("negative mixing weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(total));
        }
        let rates = (0..weights.len()).map(|j| j as f64 * gamma).collect();
        Ok(Self {
            dim,
            weights,
            rates,
            gamma,
        })
    }

    /// Mass on one point with `ones` coordinates equal to `+1`.
    pub fn point_mass(&self, ones: usize) -> f64 {
        let d = self.dim;
        let scale = 0.5f64.powi(d as i32);
        self.weights
            .iter()
            .zip(&self.rates)
            .map(|(p, t)| {
                let e = (-t).exp();
                p * (1.0 + e).powi(ones as i32) * (1.0 - e).powi((d - ones) as i32)
            })
            .sum::<f64>()
            * scale
    }

    /// Masses on all `2^d` points; bit `i` of the index set means `z_i = -1`.
    pub fn tabulate(&self) -> Result<Vec<f64>> {
        if self.dim > MAX_TABULATED_DIM {
            return Err(Error::IndexCapExceeded {
                count: 1u128 << self.dim,
                cap: 1 << MAX_TABULATED_DIM,
            });
        }
        let by_level: Vec<f64> = (0..=self.dim).map(|o| self.point_mass(o)).collect();
        Ok((0..1usize << self.dim)
            .map(|mask| by_level[self.dim - mask.count_ones() as usize])
            .collect())
    }
}

/// `2^{-d} Σ p_j e^{-t_j s}`: the Walsh coefficient of any set of size `s`.
pub fn mix_fourier_level(m: &CubeMixture, s: usize) -> Result<f64> {
    if s > m.dim {
        return Err(Error::OutOfRange(format!("level {s} exceeds d = {}", m.dim)));
    }
    let sum: f64 = m
        .weights
        .iter()
        .zip(&m.rates)
        .map(|(p, t)| p * (-t * s as f64).exp())
        .sum();
    Ok(sum * 0.5f64.powi(m.dim as i32))
}

/// `2^{-d} Σ p_j (1 + e^{-t_j})^d`.
pub fn mix_mass_allones(m: &CubeMixture) -> f64 {
    m.point_mass(m.dim)
}

/// The two sides of the cube construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubePair {
    pub epsilon: f64,
    pub mu: CubeMixture,
    pub nu: CubeMixture,
    pub poly: ErdelyiPoly,
}

/// `k = ⌈(2/7)√(d ln(1/(10ε)))⌉`, clamped to `[1, d]`.
pub fn cube_k(d: usize, epsilon: f64) -> usize {
    let k = (2.0 / 7.0 * (d as f64 * (1.0 / (10.0 * epsilon)).ln()).sqrt()).ceil();
    (k.max(1.0) as usize).min(d)
}

/// `γ = 8 ln(1/ε)/d`.
pub fn cube_gamma(d: usize, epsilon: f64) -> f64 {
    8.0 * (1.0 / epsilon).ln() / d as f64
}

/// Cube construction on its stated range `2^{-d/3} < ε < 1/170`.
pub fn cube_mixture_pair(d: usize, epsilon: f64) -> Result<CubePair> {
    let lo = 2f64.powf(-(d as f64) / 3.0);
    if !(epsilon > lo && epsilon < 1.0 / 170.0) {
        return Err(Error::OutOfRange(format!(
            "epsilon {epsilon} outside ({lo:.3e}, 1/170) for d = {d}"
        )));
    }
    cube_mixture_pair_with(d, epsilon, cube_k(d, epsilon))
}

/// Cube construction with an explicit root order and no range check on `ε`.
pub fn cube_mixture_pair_with(d: usize, epsilon: f64, k: usize) -> Result<CubePair> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let poly = erdelyi_poly(d, k)?;
    let a0 = poly.coefficients[0].abs();
    if a0 < 3.0 * epsilon {
        return Err(Error::Verification(format!(
            "|a_0| = {a0:.6} below 3·epsilon = {:.6} at k = {k}",
            3.0 * epsilon
        )));
    }
    let mut mu: Vec<f64> = poly.coefficients.iter().map(|&a| a.max(0.0)).collect();
    let mut nu: Vec<f64> = poly.coefficients.iter().map(|&a| (-a).max(0.0)).collect();
    for side in [&mut mu, &mut nu] {
        let s: f64 = side.iter().sum();
        side.iter_mut().for_each(|x| *x /= s);
    }
    let gamma = cube_gamma(d, epsilon);
    Ok(CubePair {
        epsilon,
        mu: CubeMixture::new(d, mu, gamma)?,
        nu: CubeMixture::new(d, nu, gamma)?,
        poly,
    })
}

impl CubePair {
    pub fn dim(&self) -> usize {
        self.mu.dim
    }

    /// `P₁(1^d) - P₂(1^d)`.
    pub fn mass_gap(&self) -> f64 {
        mix_mass_allones(&self.mu) - mix_mass_allones(&self.nu)
    }

    /// `μ_0 - ν_0`.
    pub fn constant_gap(&self) -> f64 {
        self.mu.weights[0] - self.nu.weights[0]
    }

    /// `|mass_gap - constant_gap|`, at most `ε` on the stated range.
    pub fn slack(&self) -> f64 {
        (self.mass_gap() - self.constant_gap()).abs()
    }

    /// `2^d |P̂₁(S) - P̂₂(S)|` for `|S| = 0..=s_max`.
    pub fn fourier_profile(&self, s_max: usize) -> Result<Vec<f64>> {
        let scale = 2f64.powi(self.dim() as i32);
        (0..=s_max.min(self.dim()))
            .map(|s| {
                Ok(scale * (mix_fourier_level(&self.mu, s)? - mix_fourier_level(&self.nu, s)?).abs())
            })
            .collect()
    }
}

/// `⌊c √(d / ln(1/ε))⌋`.
pub fn profile_level_cap(d: usize, epsilon: f64, c: f64) -> usize {
    (c * (d as f64 / (1.0 / epsilon).ln()).sqrt()).floor().max(0.0) as usize
}

// ---------------------------------------------------------------------------
// torus embedding

/// `{j : ℓ_j odd}`.
pub fn parity_set(l: &FrequencyIndex) -> Vec<usize> {
    l.entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.rem_euclid(2) == 1)
        .map(|(j, _)| j)
        .collect()
}

/// Push a mixture through `z ↦ ((1-z_i)/4)_i` onto `{0, 1/2}^d`.
pub fn embed_mixture(m: &CubeMixture) -> Result<DiracComb> {
    let masses = m.tabulate()?;
    let d = m.dim;
    let points = (0..masses.len())
        .map(|mask| {
            TorusPoint::new(
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { 0.5 } else { 0.0 })
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    DiracComb::new(d, points, masses)
}

pub fn embed_cube_pair(pair: &CubePair) -> Result<(DiracComb, DiracComb)> {
    Ok((embed_mixture(&pair.mu)?, embed_mixture(&pair.nu)?))
}

/// Largest `|comb_fourier(D, ℓ) - 2^d P̂(Par(ℓ))|` over the given frequencies.
pub fn embedding_identity_error(
    m: &CubeMixture,
    comb: &DiracComb,
    ls: &[FrequencyIndex],
) -> Result<f64> {
    let scale = 2f64.powi(m.dim as i32);
    let mut worst = 0.0f64;
    for l in ls {
        if l.dim() != m.dim {
            return Err(Error::DimensionMismatch {
                expected: m.dim,
                got: l.dim(),
            });
        }
        let lhs = comb_fourier_unchecked(comb, l);
        let rhs = scale * mix_fourier_level(m, parity_set(l).len())?;
        worst = worst.max((lhs - Complex64::new(rhs, 0.0)).norm());
    }
    Ok(worst)
}

/// `D₁(B(0, 0)) - D₂(B(0, ε_dist))`.
pub fn origin_margin(d1: &DiracComb, d2: &DiracComb, eps_dist: f64) -> Result<f64> {
    let o = TorusPoint::origin(d1.dim());
    Ok(d1.ball_mass(&o, 0.0)? - d2.ball_mass(&o, eps_dist)?)
}

/// Random frequencies with entries in `[-r, r]`.
pub fn random_frequencies(dim: usize, count: usize, r: i64, seed: u64) -> Vec<FrequencyIndex> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| FrequencyIndex((0..dim).map(|_| rng.gen_range(-r..=r)).collect()))
        .collect()
}
