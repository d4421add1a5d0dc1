//! Reconstruction from noisy low-frequency coefficients.
//!
//! Three steps: smooth the observed table with a Jackson kernel, fit a
//! grid-supported comb by linear programming so that its cell-averaged
//! coefficients match within `κ/4`, then renormalize to total variation one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fourier::{FourierTable, FrequencyIndex, IndexSet};
use crate::jackson::{smooth_table, JacksonKernel};
use crate::lp::{LinearProgram, Relation, Sense, Status};
use crate::torus::{DiracComb, TorusPoint};
use crate::{Error, Result};

/// Largest `K^d` accepted by the reconstruction LP.
pub const MAX_GRID_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconParams {
    pub dim: usize,
    pub epsilon: f64,
    pub bandlimit: u32,
    pub kappa: f64,
    pub jackson_n: u32,
    /// May saturate at `u64::MAX` when taken from the formula.
    pub grid_k: u64,
    pub delta: f64,
    /// Names of fields replaced by overrides.
    pub overridden: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub bandlimit: Option<u32>,
    pub kappa: Option<f64>,
    pub jackson_n: Option<u32>,
    pub grid_k: Option<u64>,
    pub delta: Option<f64>,
}

/// `T = ⌈6√d/ε⌉`.
pub fn default_bandlimit(dim: usize, epsilon: f64) -> u32 {
    (6.0 * (dim as f64).sqrt() / epsilon).ceil() as u32
}

/// `0.001ε/log₂(1/ε)` for `d = 1`, `(0.01ε/√d)^d` otherwise.
pub fn default_kappa(dim: usize, epsilon: f64) -> f64 {
    if dim == 1 {
        0.001 * epsilon / (1.0 / epsilon).log2()
    } else {
        (0.01 * epsilon / (dim as f64).sqrt()).powi(dim as i32)
    }
}

/// `⌈100d(2n)^{d+1}/κ⌉`, saturating.
pub fn default_grid_k(dim: usize, n: u32, kappa: f64) -> u64 {
    let k = (100.0 * dim as f64 * (2.0 * n as f64).powi(dim as i32 + 1) / kappa).ceil();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

pub fn default_params(dim: usize, epsilon: f64, overrides: ParamOverrides) -> Result<ReconParams> {
    check_epsilon(epsilon)?;
    if dim == 0 {
        return Err(Error::OutOfRange("dimension must be positive".into()));
    }
    let mut overridden = Vec::new();
    let mut pick = |name: &str, given: bool| {
        if given {
            overridden.push(name.to_string());
        }
    };
    pick("bandlimit", overrides.bandlimit.is_some());
    pick("kappa", overrides.kappa.is_some());
    pick("jackson_n", overrides.jackson_n.is_some());
    pick("grid_k", overrides.grid_k.is_some());
    pick("delta", overrides.delta.is_some());

    let bandlimit = overrides.bandlimit.unwrap_or_else(|| default_bandlimit(dim, epsilon));
    let kappa = overrides.kappa.unwrap_or_else(|| default_kappa(dim, epsilon));
    let jackson_n = overrides
        .jackson_n
        .unwrap_or_else(|| ((dim as f64).sqrt() / epsilon).ceil() as u32);
    let grid_k = overrides
        .grid_k
        .unwrap_or_else(|| default_grid_k(dim, jackson_n, kappa));
    let delta = overrides.delta.unwrap_or(kappa / 8.0);
    if !(kappa > 0.0) || !(delta > 0.0) || jackson_n == 0 || grid_k == 0 {
        return Err(Error::OutOfRange(format!(
            "kappa {kappa}, delta {delta}, n {jackson_n}, K {grid_k}"
        )));
    }
    Ok(ReconParams {
        dim,
        epsilon,
        bandlimit,
        kappa,
        jackson_n,
        grid_k,
        delta,
        overridden,
    })
}

fn rect_coeff_1d(j: u64, l: i64, k: u64) -> Complex64 {
    if l == 0 {
        return Complex64::new(1.0 / k as f64, 0.0);
    }
    let phase = |t: u64| {
        let turns = ((l as i128 * t as i128).rem_euclid(k as i128)) as f64 / k as f64;
        Complex64::from_polar(1.0, 2.0 * PI * turns)
    };
    (phase(j + 1) - phase(j)) / Complex64::new(0.0, 2.0 * PI * l as f64)
}

/// Integral of `e^{2πi ℓ·x}` over the cell `∏[j_i/K, (j_i+1)/K)`.
pub fn rect_coeff(j: &[u64], l: &FrequencyIndex, k: u64) -> Result<Complex64> {
    if j.len() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: j.len(),
        });
    }
    if let Some(bad) = j.iter().find(|&&ji| ji >= k) {
        return Err(Error::OutOfRange(format!("cell index {bad} with K = {k}")));
    }
    Ok(j.iter()
        .zip(l.entries())
        .map(|(&ji, &li)| rect_coeff_1d(ji, li, k))
        .product())
}

/// `max |t1(ℓ) - t2(ℓ)|` over indices with `‖ℓ‖∞ ≤ radius` present in both tables.
fn max_diff_within(t1: &FourierTable, t2: &FourierTable, radius: u32) -> Result<f64> {
    if t1.dim() != t2.dim() {
        return Err(Error::IndexSetMismatch);
    }
    let mut worst: f64 = 0.0;
    for (l, v) in t1.iter() {
        if l.linf_norm() > radius as u64 {
            continue;
        }
        let w = t2.get(l).ok_or(Error::IndexSetMismatch)?;
        worst = worst.max((v - w).norm());
    }
    Ok(worst)
}

fn require_linf_radius(t: &FourierTable, radius: u32) -> Result<()> {
    match t.index_set() {
        IndexSet::LinfBall { radius: r } if r >= radius => Ok(()),
        other => Err(Error::OutOfRange(format!(
            "need an l-infinity table of radius at least {radius}, got {other:?}"
        ))),
    }
}

/// True iff every coefficient with `‖ℓ‖∞ ≤ radius` differs by at most `κ`.
pub fn coefficients_within(t1: &FourierTable, t2: &FourierTable, radius: u32, kappa: f64) -> Result<bool> {
    require_linf_radius(t1, radius)?;
    require_linf_radius(t2, radius)?;
    Ok(max_diff_within(t1, t2, radius)? <= kappa)
}

/// Closeness certificate at the default `T(ε)`, `κ(ε)`: a `true` answer
/// means the two signals are within `ε` in Wasserstein distance.
pub fn certify_closeness(t1: &FourierTable, t2: &FourierTable, epsilon: f64) -> Result<bool> {
    check_epsilon(epsilon)?;
    let dim = t1.dim();
    coefficients_within(t1, t2, default_bandlimit(dim, epsilon), default_kappa(dim, epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub comb: DiracComb,
    pub params: ReconParams,
    /// `Σ|a*_j|` before renormalization.
    pub gamma: f64,
    pub lp_iterations: usize,
    pub lp_residual: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Signed,
    Distribution,
}

struct GridLp {
    cells: usize,
    lp: LinearProgram,
}

fn check_inputs(u: &FourierTable, p: &ReconParams) -> Result<usize> {
    if u.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            got: u.dim(),
        });
    }
    require_linf_radius(u, p.bandlimit)?;
    let cells = (p.grid_k as u128).checked_pow(p.dim as u32).unwrap_or(u128::MAX);
    if cells > MAX_GRID_CELLS as u128 {
        return Err(Error::IndexCapExceeded {
            count: cells,
            cap: MAX_GRID_CELLS,
        });
    }
    Ok(cells as usize)
}

/// Odometer over `[K]^d`, first coordinate fastest.
fn cell_index(mut flat: usize, k: u64, dim: usize) -> Vec<u64> {
    let mut j = Vec::with_capacity(dim);
    for _ in 0..dim {
        j.push(flat as u64 % k);
        flat /= k as usize;
    }
    j
}

fn build_lp(u: &FourierTable, p: &ReconParams, mode: Mode, cells: usize) -> Result<GridLp> {
    let kernel = JacksonKernel::new(p.jackson_n, p.dim)?;
    let smoothed = smooth_table(u, &kernel)?;
    let symmetric = smoothed.conjugate_asymmetry() <= 1e-12;
    let k = p.grid_k;
    let scale = (k as f64).powi(p.dim as i32);
    let t = p.bandlimit as i64;

    // per-coordinate cell coefficients, indexed [ℓ + T][j]
    let width = (2 * t + 1) as usize;
    let mut one_d = vec![Complex64::default(); width * k as usize];
    for (li, l) in (-t..=t).enumerate() {
        for j in 0..k {
            one_d[li * k as usize + j as usize] = rect_coeff_1d(j, l, k);
        }
    }
    let cell_js: Vec<Vec<u64>> = (0..cells).map(|c| cell_index(c, k, p.dim)).collect();

    let nvars = match mode {
        Mode::Signed => 2 * cells,
        Mode::Distribution => cells,
    };
    let mut lp = LinearProgram::new(nvars);
    let slack = p.kappa / 4.0;
    for (l, v) in smoothed.iter() {
        if l.linf_norm() > p.bandlimit as u64 {
            continue;
        }
        if symmetric && !(l.is_zero() || l.is_positive()) {
            continue;
        }
        let mut re = vec![0.0; nvars];
        let mut im = vec![0.0; nvars];
        for (c, j) in cell_js.iter().enumerate() {
            let coeff: Complex64 = j
                .iter()
                .zip(l.entries())
                .map(|(&ji, &li)| one_d[(li + t) as usize * k as usize + ji as usize])
                .product::<Complex64>()
                * scale;
            re[c] = coeff.re;
            im[c] = coeff.im;
            if mode == Mode::Signed {
                re[cells + c] = -coeff.re;
                im[cells + c] = -coeff.im;
            }
        }
        for (row, target) in [(re, v.re), (im, v.im)] {
            if row.iter().all(|&a| a == 0.0) {
                if target.abs() > slack {
                    return Err(Error::Infeasible(format!(
                        "coefficient at {:?} cannot be matched within {slack:e}",
                        l.0
                    )));
                }
                continue;
            }
            lp.add_constraint(row.clone(), Relation::Le, target + slack)?;
            lp.add_constraint(row, Relation::Ge, target - slack)?;
        }
    }
    match mode {
        Mode::Signed => lp.set_objective(Sense::Minimize, vec![1.0; nvars])?,
        Mode::Distribution => lp.add_constraint(vec![1.0; nvars], Relation::Eq, 1.0)?,
    }
    Ok(GridLp { cells, lp })
}

fn grid_point(j: &[u64], k: u64) -> TorusPoint {
    TorusPoint::new(j.iter().map(|&ji| ji as f64 / k as f64).collect::<Vec<_>>())
}

fn solve_grid(u: &FourierTable, p: &ReconParams, mode: Mode) -> Result<(Vec<f64>, usize, f64)> {
    let cells = check_inputs(u, p)?;
    let GridLp { cells, lp } = build_lp(u, p, mode, cells)?;
    let sol = lp.solve(p.delta)?;
    if sol.status == Status::Infeasible {
        return Err(Error::Infeasible(format!(
            "no grid comb matches the smoothed coefficients within kappa/4 = {:e}",
            p.kappa / 4.0
        )));
    }
    let a: Vec<f64> = match mode {
        Mode::Signed => (0..cells)
            .map(|c| sol.assignment[c] - sol.assignment[cells + c])
            .collect(),
        Mode::Distribution => sol.assignment.clone(),
    };
    Ok((a, sol.iterations, sol.max_residual))
}

/// Signed reconstruction; output has total variation one.
pub fn reconstruct_signed(u: &FourierTable, p: &ReconParams) -> Result<Reconstruction> {
    let (a, iterations, residual) = solve_grid(u, p, Mode::Signed)?;
    let gamma: f64 = a.iter().map(|x| x.abs()).sum();
    if gamma > 1.0 + p.delta {
        return Err(Error::Infeasible(format!(
            "least total variation {gamma} exceeds 1 + delta"
        )));
    }
    let k = p.grid_k;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let factor = if gamma >= 1.0 { 1.0 / gamma } else { 1.0 };
    for (c, &w) in a.iter().enumerate() {
        if w != 0.0 {
            points.push(grid_point(&cell_index(c, k, p.dim), k));
            weights.push(w * factor);
        }
    }
    if gamma < 1.0 {
        let half = (1.0 - gamma) / 2.0;
        for (num, sign) in [(1.0, 1.0), (2.0, -1.0)] {
            let mut x = vec![0.0; p.dim];
            x[0] = num / (3.0 * k as f64);
            points.push(TorusPoint::new(x));
            weights.push(sign * half);
        }
    }
    let comb = DiracComb::new(p.dim, points, weights)?;
    Ok(Reconstruction {
        comb,
        params: p.clone(),
        gamma,
        lp_iterations: iterations,
        lp_residual: residual,
    })
}

/// Nonnegative reconstruction for sources known to be distributions.
pub fn reconstruct_distribution(u: &FourierTable, p: &ReconParams) -> Result<Reconstruction> {
    let (a, iterations, residual) = solve_grid(u, p, Mode::Distribution)?;
    let gamma: f64 = a.iter().map(|x| x.abs()).sum();
    let clipped: Vec<f64> = a.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let k = p.grid_k;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (c, &w) in clipped.iter().enumerate() {
        if w > 0.0 {
            points.push(grid_point(&cell_index(c, k, p.dim), k));
            weights.push(w / total);
        }
    }
    let comb = DiracComb::new(p.dim, points, weights)?;
    Ok(Reconstruction {
        comb,
        params: p.clone(),
        gamma,
        lp_iterations: iterations,
        lp_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{comb_fourier, perturb, table_of, NoiseMode};
    use crate::torus::grid_comb;
    use proptest::prelude::*;

    fn desk() -> ReconParams {
        default_params(
            1,
            0.25,
            ParamOverrides {
                bandlimit: Some(24),
                kappa: Some(0.01),
                jackson_n: Some(4),
                grid_k: Some(64),
                delta: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn defaults() {
        let p = default_params(1, 0.25, ParamOverrides::default()).unwrap();
        assert_eq!(p.bandlimit, 24);
        assert!((p.kappa - 1.25e-4).abs() < 1e-18);
        assert_eq!(p.jackson_n, 4);
        assert!((p.delta - p.kappa / 8.0).abs() < 1e-20);
        // 100·1·8²/1.25e-4
        assert_eq!(p.grid_k, 51_200_000);
        assert!(p.overridden.is_empty());

        let p = default_params(2, 0.2, ParamOverrides::default()).unwrap();
        assert!((p.kappa - 2e-6).abs() < 1e-18);
        assert_eq!(p.bandlimit, 43);

        assert!(default_params(1, 0.0, ParamOverrides::default()).is_err());
        assert!(default_params(1, 1.5, ParamOverrides::default()).is_err());
        assert_eq!(desk().overridden, ["bandlimit", "kappa", "jackson_n", "grid_k"]);
    }

    #[test]
    fn rect_coeff_values() {
        let zero = FrequencyIndex(vec![0, 0]);
        let c = rect_coeff(&[1, 2], &zero, 4).unwrap();
        assert!((c - Complex64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);

        let c = rect_coeff(&[0], &FrequencyIndex(vec![1]), 2).unwrap();
        assert!((c - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-15);

        assert!(rect_coeff(&[2], &FrequencyIndex(vec![1]), 2).is_err());
    }

    #[test]
    fn rect_coeff_matches_quadrature() {
        // midpoint rule over the cell
        let (k, l) = (7u64, [3i64, -2]);
        let j = [4u64, 1];
        let m = 400;
        let mut acc = Complex64::default();
        for a in 0..m {
            for b in 0..m {
                let x = (j[0] as f64 + (a as f64 + 0.5) / m as f64) / k as f64;
                let y = (j[1] as f64 + (b as f64 + 0.5) / m as f64) / k as f64;
                acc += Complex64::from_polar(1.0, 2.0 * PI * (l[0] as f64 * x + l[1] as f64 * y));
            }
        }
        acc /= (m * m) as f64 * (k * k) as f64;
        let c = rect_coeff(&j, &FrequencyIndex(l.to_vec()), k).unwrap();
        assert!((c - acc).norm() < 1e-6, "{c} vs {acc}");
    }

    proptest! {
        #[test]
        fn cells_tile_the_torus(k in 1u64..12, l in -20i64..20) {
            prop_assume!(l != 0);
            let s: Complex64 = (0..k).map(|j| rect_coeff(&[j], &FrequencyIndex(vec![l]), k).unwrap()).sum();
            prop_assert!(s.norm() < 1e-12);
        }

        /// Coefficients of a piecewise-uniform measure are `K^d Σ a_j c_{j,ℓ}`;
        /// the oracle integrates each cell as a fine Dirac grid.
        #[test]
        fn piecewise_uniform_consistency(seed in 0u64..1000, l0 in -5i64..6, l1 in -5i64..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let k = 3u64;
            let a: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l = FrequencyIndex(vec![l0, l1]);
            let model: Complex64 = (0..9)
                .map(|c| rect_coeff(&cell_index(c, k, 2), &l, k).unwrap() * a[c] * 9.0)
                .sum();
            // exact average of e^{2πiℓx} over a cell: sub-sampling is exact only
            // in the limit, so compare against the closed form per axis
            let mut oracle = Complex64::default();
            for c in 0..9 {
                let j = cell_index(c, k, 2);
                let mut prod = Complex64::new(1.0, 0.0);
                for (ji, &li) in j.iter().zip(l.entries()) {
                    let lo = *ji as f64 / k as f64;
                    let hi = lo + 1.0 / k as f64;
                    prod *= if li == 0 {
                        Complex64::new(hi - lo, 0.0)
                    } else {
                        let w = 2.0 * PI * li as f64;
                        Complex64::new((w * hi).sin() - (w * lo).sin(), (w * lo).cos() - (w * hi).cos()) / w
                    };
                }
                oracle += prod * a[c] * 9.0;
            }
            prop_assert!((model - oracle).norm() < 1e-10);
        }
    }

    #[test]
    fn certify_identical_and_obs_pair() {
        let c = DiracComb::from_coords(1, &[vec![0.2], vec![0.7]], &[0.5, 0.5]).unwrap();
        let t = table_of(&c, IndexSet::LinfBall { radius: 60 }).unwrap();
        assert!(certify_closeness(&t, &t, 0.1).unwrap());

        // δ_0 vs δ_ε differ by ~2πε·|ℓ| at low ℓ, far above κ
        let eps = 0.1;
        let a = table_of(&DiracComb::dirac(TorusPoint::new(vec![0.0])), IndexSet::LinfBall { radius: 60 }).unwrap();
        let b = table_of(&DiracComb::dirac(TorusPoint::new(vec![eps])), IndexSet::LinfBall { radius: 60 }).unwrap();
        assert!(!certify_closeness(&a, &b, eps).unwrap());

        let small = table_of(&c, IndexSet::LinfBall { radius: 10 }).unwrap();
        assert!(certify_closeness(&small, &small, 0.1).is_err());
    }

    #[test]
    fn grid_pair_within_bandlimit() {
        let g1 = grid_comb(2, 7, 0.0).unwrap();
        let g2 = grid_comb(2, 7, 0.5 / 7.0).unwrap();
        let set = IndexSet::LinfBall { radius: 6 };
        let (t1, t2) = (table_of(&g1, set).unwrap(), table_of(&g2, set).unwrap());
        assert!(coefficients_within(&t1, &t2, 6, 1e-10).unwrap());
    }

    #[test]
    fn signed_reconstruction_of_single_spike() {
        let p = desk();
        let f = DiracComb::dirac(TorusPoint::new(vec![0.5]));
        let u = table_of(&f, IndexSet::LinfBall { radius: 24 }).unwrap();
        let r = reconstruct_signed(&u, &p).unwrap();
        assert!((r.comb.total_mass() - 1.0).abs() < 1e-9);
        // most mass lands within a few cells of 0.5
        let near = r.comb.ball_mass(&TorusPoint::new(vec![0.5]), 0.1).unwrap();
        assert!(near > 0.8, "{near}");
        assert_eq!(r.params, p);
    }

    #[test]
    fn signed_reconstruction_under_noise() {
        let p = desk();
        let f = DiracComb::from_coords(1, &[vec![0.1], vec![0.6]], &[0.7, -0.3]).unwrap();
        let u = table_of(&f, IndexSet::LinfBall { radius: 24 }).unwrap();
        let noisy = perturb(&u, p.kappa / 8.0, NoiseMode::WorstCaseSign, 0).unwrap();
        let r = reconstruct_signed(&noisy, &p).unwrap();
        assert!((r.comb.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn distribution_reconstruction() {
        let p = desk();
        let g = grid_comb(1, 4, 0.0).unwrap();
        let u = table_of(&g, IndexSet::LinfBall { radius: 24 }).unwrap();
        let r = reconstruct_distribution(&u, &p).unwrap();
        assert!(r.comb.is_distribution());

        let d0 = DiracComb::dirac(TorusPoint::origin(1));
        let u = table_of(&d0, IndexSet::LinfBall { radius: 24 }).unwrap();
        let r = reconstruct_distribution(&u, &p).unwrap();
        // the fit follows the smoothed spike, whose width is about 1/n
        let near = r.comb.ball_mass(&TorusPoint::origin(1), p.epsilon).unwrap();
        assert!(near >= 1.0 - p.epsilon, "{near}");
    }

    #[test]
    fn garbage_table_is_reported() {
        let p = desk();
        let mut vals = std::collections::BTreeMap::new();
        for l in (IndexSet::LinfBall { radius: 24 }).enumerate(1, 1000).unwrap() {
            vals.insert(l, Complex64::new(5.0, 0.0));
        }
        let u = FourierTable::new(1, IndexSet::LinfBall { radius: 24 }, vals).unwrap();
        assert!(matches!(reconstruct_signed(&u, &p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn grid_cap_enforced() {
        let p = default_params(1, 0.25, ParamOverrides::default()).unwrap();
        let u = table_of(&DiracComb::dirac(TorusPoint::origin(1)), IndexSet::LinfBall { radius: 24 }).unwrap();
        assert!(matches!(reconstruct_signed(&u, &p), Err(Error::IndexCapExceeded { .. })));
    }

    #[test]
    fn output_tracks_smoothed_coefficients() {
        let p = desk();
        let f = DiracComb::dirac(TorusPoint::new(vec![0.3]));
        let u = table_of(&f, IndexSet::LinfBall { radius: 24 }).unwrap();
        let r = reconstruct_distribution(&u, &p).unwrap();
        let kern = JacksonKernel::new(p.jackson_n, 1).unwrap();
        for l in 0..=24i64 {
            let li = FrequencyIndex(vec![l]);
            let target = comb_fourier(&f, &li).unwrap() * kern.fourier_1d(l);
            let got = comb_fourier(&r.comb, &li).unwrap();
            // atoms sit at cell corners rather than spread over cells
            let slack = p.kappa / 4.0 + p.delta + PI * l as f64 / 64.0;
            assert!((target - got).norm() <= slack + 1e-12, "ℓ={l}");
        }
    }
}
