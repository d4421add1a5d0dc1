//! Points, the toroidal metric, and finite signed measures on `[0,1)^d`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used when deciding whether a comb is normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A point of the torus, every coordinate reduced into `[0,1)`.
///
/// Serialized as a bare coordinate array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl From<Vec<f64>> for TorusPoint {
    fn from(v: Vec<f64>) -> Self {
        TorusPoint::new(v)
    }
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Self {
        p.coords
    }
}

/// Reduce a real into `[0,1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r + 0.0
    }
}

/// One-dimensional wraparound distance, in `[0, 1/2]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs().rem_euclid(1.0);
    diff.min(1.0 - diff)
}

impl TorusPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let mut coords = coords.into();
        for c in coords.iter_mut() {
            *c = wrap(*c);
        }
        Self { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn key(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.to_bits()).collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Euclidean combination of per-coordinate wraparound distances.
pub fn toroidal_distance(a: &TorusPoint, b: &TorusPoint) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(distance_unchecked(a.coords(), b.coords()))
}

pub(crate) fn distance_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let c = circle_distance(*x, *y);
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

/// A finite weighted point set `Σ w_j δ_{x_j}`.
///
/// Points are pairwise distinct: construction merges exact duplicates (after
/// reduction mod 1) by summing their weights, keeping first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracComb {
    dim: usize,
    points: Vec<TorusPoint>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl DiracComb {
    pub fn new(dim: usize, points: Vec<TorusPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::OutOfRange(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
        let mut merged_points = Vec::with_capacity(points.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(points.len());
        for (p, w) in points.into_iter().zip(weights) {
            check_dim(dim, p.dim())?;
            if !w.is_finite() {
                return Err(Error::OutOfRange(format!("non-finite weight {w}")));
            }
            match index.get(&p.key()) {
                Some(&i) => merged_weights[i] += w,
                None => {
                    index.insert(p.key(), merged_points.len());
                    merged_points.push(p);
                    merged_weights.push(w);
                }
            }
        }
        let total_mass = merged_weights.iter().map(|w| w.abs()).sum();
        Ok(Self {
            dim,
            points: merged_points,
            weights: merged_weights,
            total_mass,
        })
    }

    /// Build from raw coordinate rows.
    pub fn from_coords(dim: usize, coords: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let points = coords.iter().map(|c| TorusPoint::new(c.clone())).collect();
        Self::new(dim, points, weights.to_vec())
    }

    /// Point mass of weight one.
    pub fn dirac(point: TorusPoint) -> Self {
        let dim = point.dim();
        Self {
            dim,
            points: vec![point],
            weights: vec![1.0],
            total_mass: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TorusPoint, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// `Σ |w_j|`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `Σ w_j`.
    pub fn signed_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    pub fn is_distribution(&self) -> bool {
        self.is_nonnegative() && self.is_normalized()
    }

    /// Errors unless the comb is a probability distribution.
    pub fn require_distribution(&self) -> Result<()> {
        if !self.is_nonnegative() {
            return Err(Error::NotDistribution("negative weight present".into()));
        }
        if !self.is_normalized() {
            return Err(Error::NotNormalized(self.total_mass));
        }
        Ok(())
    }

    /// Scale weights so that `Σ |w_j| = 1`.
    pub fn normalize(&self) -> Result<Self> {
        if self.total_mass == 0.0 {
            return Err(Error::ZeroMass);
        }
        let weights = self.weights.iter().map(|w| w / self.total_mass).collect::<Vec<_>>();
        let total_mass = weights.iter().map(|w: &f64| w.abs()).sum();
        Ok(Self {
            dim: self.dim,
            points: self.points.clone(),
            weights,
            total_mass,
        })
    }

    /// Signed mass inside the closed ball `{y : d_tor(y, center) ≤ radius}`.
    pub fn ball_mass(&self, center: &TorusPoint, radius: f64) -> Result<f64> {
        check_dim(self.dim, center.dim())?;
        Ok(self
            .iter()
            .filter(|(p, _)| distance_unchecked(p.coords(), center.coords()) <= radius)
            .map(|(_, w)| w)
            .sum())
    }
}

/// Uniform distribution on the shifted grid `(j/T' + offset)^d`, `j ∈ {0..T'-1}`.
pub fn grid_comb(dim: usize, side: usize, offset: f64) -> Result<DiracComb> {
    if side == 0 {
        return Err(Error::OutOfRange("grid side must be at least 1".into()));
    }
    let count = side.checked_pow(dim as u32).ok_or_else(|| {
        Error::OutOfRange(format!("grid {side}^{dim} overflows"))
    })?;
    let weight = 1.0 / count as f64;
    let mut points = Vec::with_capacity(count);
    let mut digits = vec![0usize; dim];
    for _ in 0..count {
        points.push(TorusPoint::new(
            digits
                .iter()
                .map(|&j| j as f64 / side as f64 + offset)
                .collect::<Vec<_>>(),
        ));
        for digit in digits.iter_mut().rev() {
            *digit += 1;
            if *digit < side {
                break;
            }
            *digit = 0;
        }
    }
    DiracComb::new(dim, points, vec![weight; count])
}

/// `count` uniform atoms with weights normalized to total `|mass| = 1`.
///
/// Weight magnitudes are drawn from `[0.1, 1)`; with `signed` each sign is a
/// fair coin flip.
pub fn random_comb(dim: usize, count: usize, seed: u64, signed: bool) -> Result<DiracComb> {
    if dim == 0 || count == 0 {
        return Err(Error::OutOfRange("need positive dimension and atom count".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(TorusPoint::new((0..dim).map(|_| rng.gen::<f64>()).collect::<Vec<_>>()));
        let w: f64 = rng.gen_range(0.1..1.0);
        weights.push(if signed && rng.gen::<bool>() { -w } else { w });
    }
    let s: f64 = weights.iter().map(|w| w.abs()).sum();
    weights.iter_mut().for_each(|w| *w /= s);
    DiracComb::new(dim, points, weights)
}

/// On-disk form: `{"dim": d, "points": [[...]], "weights": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombJson {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl From<&DiracComb> for CombJson {
    fn from(c: &DiracComb) -> Self {
        Self {
            dim: c.dim,
            points: c.points.iter().map(|p| p.coords.clone()).collect(),
            weights: c.weights.clone(),
        }
    }
}

impl TryFrom<CombJson> for DiracComb {
    type Error = Error;

    fn try_from(j: CombJson) -> Result<Self> {
        DiracComb::from_coords(j.dim, &j.points, &j.weights)
    }
}

impl Serialize for DiracComb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CombJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiracComb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CombJson::deserialize(d)?;
        DiracComb::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec())
    }

    #[test]
    fn distance_wraps() {
        assert!((toroidal_distance(&pt(&[0.1]), &pt(&[0.9])).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(toroidal_distance(&pt(&[0.3, 0.7]), &pt(&[0.3, 0.7])).unwrap(), 0.0);
        let d = toroidal_distance(&pt(&[0.0, 0.0]), &pt(&[0.5, 0.5])).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(toroidal_distance(&pt(&[0.0]), &pt(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn coordinates_reduced() {
        let p = pt(&[-0.25, 1.5, 3.0, -1e-20]);
        assert_eq!(p.coords(), &[0.75, 0.5, 0.0, 0.0]);
        assert!(p.coords().iter().all(|&c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn duplicates_merge_exactly() {
        let exact = DiracComb::new(1, vec![pt(&[0.5]), pt(&[-0.5]), pt(&[0.25])], vec![0.2, 0.3, 0.5])
            .unwrap();
        assert_eq!(exact.len(), 2);
        assert_eq!(exact.weights(), &[0.5, 0.5]);
        // no epsilon merging
        let near = DiracComb::new(1, vec![pt(&[0.5]), pt(&[0.5 + 1e-15])], vec![0.5, 0.5]).unwrap();
        assert_eq!(near.len(), 2);
    }

    #[test]
    fn normalize_examples() {
        let c = DiracComb::from_coords(1, &[vec![0.0], vec![0.5]], &[2.0, -2.0]).unwrap();
        assert_eq!(c.normalize().unwrap().weights(), &[0.5, -0.5]);
        let c = DiracComb::dirac(pt(&[0.1]));
        assert_eq!(c.normalize().unwrap().weights(), &[1.0]);
        let c = DiracComb::from_coords(1, &[vec![0.0], vec![0.5]], &[0.3, 0.9]).unwrap();
        let n = c.normalize().unwrap();
        assert!((n.weights()[0] - 0.25).abs() < 1e-15 && (n.weights()[1] - 0.75).abs() < 1e-15);
        let z = DiracComb::from_coords(1, &[vec![0.0]], &[0.0]).unwrap();
        assert!(matches!(z.normalize(), Err(Error::ZeroMass)));
    }

    #[test]
    fn ball_mass_examples() {
        let d0 = DiracComb::dirac(pt(&[0.0]));
        assert_eq!(d0.ball_mass(&pt(&[0.0]), 0.0).unwrap(), 1.0);
        assert_eq!(d0.ball_mass(&pt(&[0.5]), 0.4).unwrap(), 0.0);
        let c = DiracComb::from_coords(1, &[vec![0.1], vec![0.6]], &[0.3, 0.7]).unwrap();
        assert!((c.ball_mass(&pt(&[0.0]), 0.15).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn grid_examples() {
        let g = grid_comb(1, 2, 0.0).unwrap();
        assert_eq!(g.points(), &[pt(&[0.0]), pt(&[0.5])]);
        assert_eq!(g.weights(), &[0.5, 0.5]);
        let g = grid_comb(2, 2, 0.25).unwrap();
        assert_eq!(g.len(), 4);
        for p in g.points() {
            assert!(p.coords().iter().all(|&c| c == 0.25 || c == 0.75));
        }
        assert!(g.weights().iter().all(|&w| w == 0.25));
        let g = grid_comb(1, 3, 0.0).unwrap();
        assert!(g.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-16));
        assert!(grid_comb(1, 0, 0.0).is_err());
    }

    #[test]
    fn random_comb_is_seeded_and_normalized() {
        let a = random_comb(2, 5, 11, true).unwrap();
        assert_eq!(a, random_comb(2, 5, 11, true).unwrap());
        assert!(a.is_normalized());
        let b = random_comb(3, 4, 2, false).unwrap();
        assert!(b.is_distribution());
        assert!(random_comb(0, 3, 0, false).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = DiracComb::from_coords(2, &[vec![0.1, 0.2], vec![0.7, 0.9]], &[0.4, -0.6]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: DiracComb = serde_json::from_str(&s).unwrap();
        for (a, b) in c.iter().zip(back.iter()) {
            for (x, y) in a.0.coords().iter().zip(b.0.coords()) {
                assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
            }
            assert!((a.1 - b.1).abs() <= 1e-15);
        }
    }

    fn point_strategy(d: usize) -> impl Strategy<Value = TorusPoint> {
        prop::collection::vec(-2.0f64..2.0, d).prop_map(TorusPoint::new)
    }

    proptest! {
        #[test]
        fn metric_axioms(a in point_strategy(3), b in point_strategy(3), c in point_strategy(3)) {
            let ab = toroidal_distance(&a, &b).unwrap();
            let ba = toroidal_distance(&b, &a).unwrap();
            let bc = toroidal_distance(&b, &c).unwrap();
            let ac = toroidal_distance(&a, &c).unwrap();
            prop_assert_eq!(toroidal_distance(&a, &a).unwrap(), 0.0);
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!(ab <= 3f64.sqrt() / 2.0 + 1e-12);
        }

        #[test]
        fn full_ball_holds_all_mass(
            pts in prop::collection::vec(point_strategy(2), 1..8),
            ws in prop::collection::vec(-1.0f64..1.0, 8),
            center in point_strategy(2),
        ) {
            let n = pts.len();
            let c = DiracComb::new(2, pts, ws[..n].to_vec()).unwrap();
            let m = c.ball_mass(&center, 2f64.sqrt() / 2.0).unwrap();
            prop_assert!((m - c.signed_mass()).abs() <= 1e-12);
        }

        #[test]
        fn grid_is_distribution(d in 1usize..4, side in 1usize..6, off in 0.0f64..1.0) {
            let g = grid_comb(d, side, off).unwrap();
            prop_assert!(g.is_nonnegative());
            prop_assert!((g.signed_mass() - 1.0).abs() <= 1e-12);
        }
    }
}
