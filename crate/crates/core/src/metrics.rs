//! Distances between finite measures on the torus.
//!
//! Wasserstein distance is solved exactly by linear programming. For signed
//! measures it is the bounded-Lipschitz dual
//! `max Σ h_i m_i` s.t. `|h_i - h_j| ≤ d(x_i, x_j)`, `|h_i| ≤ √d` on the
//! union support. Any feasible `h` extends to the whole torus (McShane
//! extension, then clamping to `[-√d, √d]`), so the finite program is exact.
//! It is solved through its min-cost-flow dual, which has one row per point.
//!
//! The heavy-hitter distance is returned as a certified interval.

use serde::{Deserialize, Serialize};

use crate::lp::{LinearProgram, Relation, Sense};
use crate::torus::{distance_unchecked, DiracComb, TorusPoint};
use crate::{Error, Result};

const MASS_TOL: f64 = 1e-9;
const LP_TOL: f64 = 1e-9;
/// Upper limit on the number of grid centers in heavy-hitter search.
pub const MAX_CENTERS: usize = 1_000_000;

fn check_pair(f: &DiracComb, g: &DiracComb) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    for c in [f, g] {
        if (c.total_mass() - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(c.total_mass()));
        }
    }
    Ok(())
}

/// Wasserstein distance between two normalized combs.
pub fn wasserstein(f: &DiracComb, g: &DiracComb) -> Result<f64> {
    check_pair(f, g)?;
    if f.is_nonnegative() && g.is_nonnegative() {
        transport(f, g)
    } else {
        signed_flow(f, g)
    }
}

/// Classical transportation LP between two distributions.
fn transport(f: &DiracComb, g: &DiracComb) -> Result<f64> {
    let (n, m) = (f.len(), g.len());
    let (sf, sg) = (f.signed_mass(), g.signed_mass());
    let mut lp = LinearProgram::new(n * m);
    let mut cost = Vec::with_capacity(n * m);
    for p in f.points() {
        for q in g.points() {
            cost.push(distance_unchecked(p.coords(), q.coords()));
        }
    }
    lp.set_objective(Sense::Minimize, cost)?;
    for (i, w) in f.weights().iter().enumerate() {
        let terms: Vec<_> = (0..m).map(|j| (i * m + j, 1.0)).collect();
        lp.add_sparse(&terms, Relation::Eq, w / sf)?;
    }
    // the last demand row is implied by the others
    for (j, w) in g.weights().iter().enumerate().take(m.saturating_sub(1)) {
        let terms: Vec<_> = (0..n).map(|i| (i * m + j, 1.0)).collect();
        lp.add_sparse(&terms, Relation::Eq, w / sg)?;
    }
    let sol = lp.solve(LP_TOL)?;
    Ok(sol.objective_value.unwrap_or(0.0).max(0.0))
}

/// Points of `f - g` with nonzero net mass.
fn net_measure(f: &DiracComb, g: &DiracComb) -> Result<(Vec<TorusPoint>, Vec<f64>)> {
    let points = f.points().iter().chain(g.points()).cloned().collect();
    let weights = f
        .weights()
        .iter()
        .copied()
        .chain(g.weights().iter().map(|w| -w))
        .collect();
    let diff = DiracComb::new(f.dim(), points, weights)?;
    Ok(diff
        .iter()
        .filter(|(_, w)| *w != 0.0)
        .map(|(p, w)| (p.clone(), w))
        .unzip())
}

/// Min-cost flow with dumping at cost `√d`, dual to the bounded-Lipschitz program.
fn signed_flow(f: &DiracComb, g: &DiracComb) -> Result<f64> {
    let (pts, mass) = net_measure(f, g)?;
    let n = pts.len();
    if n == 0 {
        return Ok(0.0);
    }
    let cap = (f.dim() as f64).sqrt();
    let arcs = n * (n - 1);
    let mut lp = LinearProgram::new(arcs + 2 * n);
    let mut cost = Vec::with_capacity(arcs + 2 * n);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut var = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            cost.push(distance_unchecked(pts[i].coords(), pts[j].coords()));
            rows[i].push((var, 1.0));
            rows[j].push((var, -1.0));
            var += 1;
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.push((arcs + 2 * i, 1.0));
        row.push((arcs + 2 * i + 1, -1.0));
        cost.push(cap);
        cost.push(cap);
    }
    lp.set_objective(Sense::Minimize, cost)?;
    for (row, m) in rows.iter().zip(&mass) {
        lp.add_sparse(row, Relation::Eq, *m)?;
    }
    let sol = lp.solve(LP_TOL)?;
    Ok(sol.objective_value.unwrap_or(0.0).max(0.0))
}

/// The bounded-Lipschitz program stated directly in the potentials `h`.
///
/// Quadratic in the support size; meant for cross-checking.
pub fn wasserstein_dual_lp(f: &DiracComb, g: &DiracComb) -> Result<f64> {
    check_pair(f, g)?;
    let (pts, mass) = net_measure(f, g)?;
    let n = pts.len();
    if n == 0 {
        return Ok(0.0);
    }
    let cap = (f.dim() as f64).sqrt();
    let mut lp = LinearProgram::new(n);
    for i in 0..n {
        lp.set_bounds(i, -cap, cap)?;
    }
    lp.set_objective(Sense::Maximize, mass)?;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = distance_unchecked(pts[i].coords(), pts[j].coords());
                lp.add_sparse(&[(i, 1.0), (j, -1.0)], Relation::Le, d)?;
            }
        }
    }
    Ok(lp.solve(LP_TOL)?.objective_value.unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HHParams {
    pub eps_dist: f64,
    /// Grid centers per axis; the total is capped at [`MAX_CENTERS`].
    pub center_grid: usize,
    pub radius_grid: usize,
}

impl HHParams {
    pub fn new(eps_dist: f64) -> Self {
        Self {
            eps_dist,
            center_grid: 64,
            radius_grid: 256,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_dist > 0.0 && self.eps_dist < 1.0) {
            return Err(Error::OutOfRange(format!("eps_dist {}", self.eps_dist)));
        }
        if self.center_grid == 0 || self.radius_grid == 0 {
            return Err(Error::OutOfRange("grid resolutions must be at least 1".into()));
        }
        Ok(())
    }

    /// Grid centers per axis after applying the cap.
    pub fn effective_grid(&self, dim: usize) -> usize {
        let mut g = self.center_grid;
        while g > 1 && (g as f64).powi(dim as i32) > MAX_CENTERS as f64 {
            g -= 1;
        }
        g
    }

    /// Every point of the torus lies within this distance of a grid center.
    pub fn covering_radius(&self, dim: usize) -> f64 {
        (dim as f64).sqrt() / (2.0 * self.effective_grid(dim) as f64)
    }
}

/// True iff the ball pair `(x, τ)` violates the heavy-hitter condition at slack `ε`
/// in either direction.
pub fn hh_violation(
    d1: &DiracComb,
    d2: &DiracComb,
    eps_dist: f64,
    eps: f64,
    x: &TorusPoint,
    tau: f64,
) -> Result<bool> {
    if !(0.0..=eps_dist).contains(&tau) {
        return Err(Error::OutOfRange(format!("tau {tau} outside [0, {eps_dist}]")));
    }
    let forward = d1.ball_mass(x, tau)? > d2.ball_mass(x, tau + eps_dist)? + eps;
    let backward = d2.ball_mass(x, tau)? > d1.ball_mass(x, tau + eps_dist)? + eps;
    Ok(forward || backward)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: TorusPoint,
    pub tau: f64,
    /// True when the first measure is the heavier one inside the ball.
    pub first_heavier: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HHInterval {
    pub lower: f64,
    pub upper: f64,
    pub witness: Option<Witness>,
}

/// Ball masses around a fixed center as a step function of the radius.
struct Radial {
    dists: Vec<f64>,
    cum: Vec<f64>,
}

impl Radial {
    fn new(c: &DiracComb, center: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = c
            .iter()
            .map(|(p, w)| (distance_unchecked(p.coords(), center), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(pairs.len());
        for &(_, w) in &pairs {
            acc += w;
            cum.push(acc);
        }
        Self {
            dists: pairs.into_iter().map(|p| p.0).collect(),
            cum,
        }
    }

    fn mass(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        match self.dists.partition_point(|&d| d <= r) {
            0 => 0.0,
            k => self.cum[k - 1],
        }
    }
}

struct Best {
    margin: f64,
    witness: Option<Witness>,
}

impl Best {
    fn new() -> Self {
        Self {
            margin: f64::NEG_INFINITY,
            witness: None,
        }
    }

    fn offer(&mut self, margin: f64, center: &[f64], tau: f64, first_heavier: bool) {
        if margin > self.margin {
            self.margin = margin;
            self.witness = Some(Witness {
                center: TorusPoint::new(center.to_vec()),
                tau,
                first_heavier,
                margin,
            });
        }
    }
}

/// Exact margins at `center` over breakpoint radii and a uniform radius grid.
fn scan_center(d1: &DiracComb, d2: &DiracComb, center: &[f64], p: &HHParams, best: &mut Best) {
    let e = p.eps_dist;
    let r1 = Radial::new(d1, center);
    let r2 = Radial::new(d2, center);
    for (heavy, light, first) in [(&r1, &r2, true), (&r2, &r1, false)] {
        let grid = (0..=p.radius_grid).map(|k| e * k as f64 / p.radius_grid as f64);
        let breaks = heavy.dists.iter().copied().take_while(|&d| d <= e);
        for tau in std::iter::once(0.0).chain(breaks).chain(grid) {
            best.offer(heavy.mass(tau) - light.mass(tau + e), center, tau, first);
        }
    }
}

/// Largest margin any center within `rho` of `center` could reach.
fn cover_bound(d1: &DiracComb, d2: &DiracComb, center: &[f64], e: f64, rho: f64) -> f64 {
    let r1 = Radial::new(d1, center);
    let r2 = Radial::new(d2, center);
    let mut worst = f64::NEG_INFINITY;
    for (heavy, light) in [(&r1, &r2), (&r2, &r1)] {
        let breaks = heavy
            .dists
            .iter()
            .map(|d| d - rho)
            .filter(|&t| (0.0..=e).contains(&t));
        for tau in std::iter::once(0.0).chain(breaks) {
            worst = worst.max(heavy.mass(tau + rho) - light.mass(tau + e - rho));
        }
    }
    worst
}

fn grid_centers(dim: usize, g: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = g.pow(dim as u32);
    (0..total).map(move |mut flat| {
        let mut x = Vec::with_capacity(dim);
        for _ in 0..dim {
            x.push((flat % g) as f64 / g as f64);
            flat /= g;
        }
        x
    })
}

/// Exhaustive search on the circle: optimal balls are the smallest arcs
/// spanning a run of consecutive support points of the heavier measure.
fn hh_circle(d1: &DiracComb, d2: &DiracComb, e: f64) -> Best {
    let mut best = Best::new();
    for (heavy, light, first) in [(d1, d2, true), (d2, d1, false)] {
        let mut xs: Vec<f64> = heavy.points().iter().map(|p| p.coords()[0]).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        for a in 0..n {
            for step in 0..n {
                let b = (a + step) % n;
                let len = (xs[b] - xs[a]).rem_euclid(1.0);
                if len > 2.0 * e + 1e-12 {
                    break;
                }
                let center = [(xs[a] + len / 2.0).rem_euclid(1.0)];
                let tau = (len / 2.0 + 1e-12).min(e);
                let c = TorusPoint::new(center.to_vec());
                let margin = heavy.ball_mass(&c, tau).unwrap_or(0.0)
                    - light.ball_mass(&c, tau + e).unwrap_or(0.0);
                best.offer(margin, &center, tau, first);
            }
        }
    }
    best
}

/// Heavy-hitter distance at scale `eps_dist`, bracketed by `[lower, upper]`.
///
/// On the circle the search is exhaustive and the bounds coincide. In higher
/// dimension the lower bound comes from explicit witnesses (support points and
/// grid centers) and the upper bound from covering the torus by balls of the
/// grid's covering radius around grid centers.
pub fn hh_distance(d1: &DiracComb, d2: &DiracComb, p: &HHParams) -> Result<HHInterval> {
    p.validate()?;
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch {
            expected: d1.dim(),
            got: d2.dim(),
        });
    }
    let dim = d1.dim();
    let e = p.eps_dist;
    if dim == 1 {
        let best = hh_circle(d1, d2, e);
        let value = best.margin.clamp(0.0, 1.0);
        return Ok(HHInterval {
            lower: value,
            upper: value,
            witness: best.witness.filter(|w| w.margin > 0.0),
        });
    }
    let mut best = Best::new();
    for c in d1.points().iter().chain(d2.points()) {
        scan_center(d1, d2, c.coords(), p, &mut best);
    }
    let g = p.effective_grid(dim);
    let rho = p.covering_radius(dim);
    let mut upper = f64::NEG_INFINITY;
    for c in grid_centers(dim, g) {
        scan_center(d1, d2, &c, p, &mut best);
        upper = upper.max(cover_bound(d1, d2, &c, e, rho));
    }
    let lower = best.margin.clamp(0.0, 1.0);
    Ok(HHInterval {
        lower,
        upper: upper.clamp(lower, 1.0),
        witness: best.witness.filter(|w| w.margin > 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhBoundCheck {
    pub wasserstein: f64,
    pub hh_upper: f64,
    /// `w / (ε_dist - 2ρ)` with `ρ` the covering radius (zero on the circle).
    pub bound: f64,
    pub holds: bool,
}

/// Compare the heavy-hitter upper bound against `d_W / ε_dist`.
///
/// The covering bound measures balls dilated by `ε_dist - 2ρ` rather than
/// `ε_dist`, so the comparison uses that reduced dilation.
pub fn wasserstein_hh_bound(d1: &DiracComb, d2: &DiracComb, p: &HHParams) -> Result<HhBoundCheck> {
    d1.require_distribution()?;
    d2.require_distribution()?;
    let w = wasserstein(d1, d2)?;
    let hh = hh_distance(d1, d2, p)?;
    let rho = if d1.dim() == 1 { 0.0 } else { p.covering_radius(d1.dim()) };
    let gap = p.eps_dist - 2.0 * rho;
    if !(gap > 0.0) {
        return Err(Error::OutOfRange(format!(
            "center grid too coarse: covering radius {rho} vs eps_dist {}",
            p.eps_dist
        )));
    }
    let bound = w / gap;
    Ok(HhBoundCheck {
        wasserstein: w,
        hh_upper: hh.upper,
        bound,
        holds: hh.upper <= bound + 1e-9,
    })
}

pub fn check_wasserstein_implies_hh(d1: &DiracComb, d2: &DiracComb, eps_dist: f64) -> Result<bool> {
    Ok(wasserstein_hh_bound(d1, d2, &HHParams::new(eps_dist))?.holds)
}
