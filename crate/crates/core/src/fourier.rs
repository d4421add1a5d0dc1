//! Fourier coefficients of Dirac combs and the bounded-noise measurement model.
//!
//! The convention is `f̂(ℓ) = Σ_j w_j · exp(2πi ℓ·x_j)`, matching the integral
//! `∫ f(x) e^{2πi ℓ·x} dx` for a comb.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::torus::DiracComb;
use crate::{Error, Result};

/// Default cap on the number of enumerated frequency indices.
pub const DEFAULT_INDEX_CAP: usize = 10_000_000;

/// An integer frequency vector `ℓ ∈ Z^d`. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyIndex(pub Vec<i64>);

impl FrequencyIndex {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn linf_norm(&self) -> u64 {
        self.0.iter().map(|e| e.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|e| -e).collect())
    }

    /// First nonzero entry is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&e| e != 0).is_some_and(|&e| e > 0)
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&l, &c)| l as f64 * c).sum()
    }
}

impl From<Vec<i64>> for FrequencyIndex {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// The declared frequency support of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum IndexSet {
    #[serde(rename = "linf")]
    LinfBall {
        #[serde(rename = "T")]
        radius: u32,
    },
    #[serde(rename = "l1")]
    L1Ball {
        #[serde(rename = "T")]
        radius: u32,
    },
}

impl IndexSet {
    pub fn radius(&self) -> u32 {
        match *self {
            IndexSet::LinfBall { radius } | IndexSet::L1Ball { radius } => radius,
        }
    }

    pub fn contains(&self, l: &FrequencyIndex) -> bool {
        match *self {
            IndexSet::LinfBall { radius } => l.linf_norm() <= radius as u64,
            IndexSet::L1Ball { radius } => l.l1_norm() <= radius as u64,
        }
    }

    pub fn count(&self, dim: usize) -> u128 {
        match *self {
            IndexSet::LinfBall { radius } => linf_count(dim, radius),
            IndexSet::L1Ball { radius } => l1_count(dim, radius),
        }
    }

    pub fn enumerate(&self, dim: usize, cap: usize) -> Result<Vec<FrequencyIndex>> {
        match *self {
            IndexSet::LinfBall { radius } => enumerate_linf_capped(dim, radius, cap),
            IndexSet::L1Ball { radius } => enumerate_l1_capped(dim, radius, cap),
        }
    }
}

fn linf_count(dim: usize, radius: u32) -> u128 {
    let side = 2 * radius as u128 + 1;
    let mut total: u128 = 1;
    for _ in 0..dim {
        total = total.saturating_mul(side);
    }
    total
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// `Σ_{m=0}^{min(d,T)} 2^m C(d,m) C(T,m)`: lattice points in the ℓ1 ball.
pub fn l1_count(dim: usize, radius: u32) -> u128 {
    let (d, t) = (dim as u128, radius as u128);
    (0..=d.min(t))
        .map(|m| {
            (1u128 << m.min(127))
                .saturating_mul(binomial_u128(d, m))
                .saturating_mul(binomial_u128(t, m))
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn check_cap(count: u128, cap: usize) -> Result<()> {
    if count > cap as u128 {
        Err(Error::IndexCapExceeded { count, cap })
    } else {
        Ok(())
    }
}

/// All `ℓ` with `‖ℓ‖∞ ≤ T`, lexicographic.
pub fn enumerate_linf(dim: usize, radius: u32) -> Result<Vec<FrequencyIndex>> {
    enumerate_linf_capped(dim, radius, DEFAULT_INDEX_CAP)
}

pub fn enumerate_linf_capped(dim: usize, radius: u32, cap: usize) -> Result<Vec<FrequencyIndex>> {
    let count = linf_count(dim, radius);
    check_cap(count, cap)?;
    let r = radius as i64;
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![-r; dim];
    for _ in 0..count {
        out.push(FrequencyIndex(cur.clone()));
        for e in cur.iter_mut().rev() {
            *e += 1;
            if *e <= r {
                break;
            }
            *e = -r;
        }
    }
    Ok(out)
}

/// All `ℓ` with `‖ℓ‖₁ ≤ T`, lexicographic.
pub fn enumerate_l1(dim: usize, radius: u32) -> Result<Vec<FrequencyIndex>> {
    enumerate_l1_capped(dim, radius, DEFAULT_INDEX_CAP)
}

pub fn enumerate_l1_capped(dim: usize, radius: u32, cap: usize) -> Result<Vec<FrequencyIndex>> {
    let count = l1_count(dim, radius);
    check_cap(count, cap)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut prefix = Vec::with_capacity(dim);
    fill_l1(dim, radius as i64, &mut prefix, &mut out);
    Ok(out)
}

fn fill_l1(dim: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<FrequencyIndex>) {
    if prefix.len() == dim {
        out.push(FrequencyIndex(prefix.clone()));
        return;
    }
    for e in -budget..=budget {
        prefix.push(e);
        fill_l1(dim, budget - e.abs(), prefix, out);
        prefix.pop();
    }
}

/// `Σ_j w_j exp(2πi ℓ·x_j)`.
pub fn comb_fourier(c: &DiracComb, l: &FrequencyIndex) -> Result<Complex64> {
    if c.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: l.dim(),
        });
    }
    Ok(comb_fourier_unchecked(c, l))
}

pub(crate) fn comb_fourier_unchecked(c: &DiracComb, l: &FrequencyIndex) -> Complex64 {
    c.iter()
        .map(|(p, w)| {
            // reduce the phase mod 1 before multiplying by 2π
            let phase = l.dot(p.coords()).rem_euclid(1.0);
            Complex64::from_polar(w, 2.0 * PI * phase)
        })
        .sum()
}

/// Coefficients over a declared index set.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    dim: usize,
    index_set: IndexSet,
    values: BTreeMap<FrequencyIndex, Complex64>,
}

impl FourierTable {
    /// Build from explicit values; every key must lie in the index set.
    pub fn new(
        dim: usize,
        index_set: IndexSet,
        values: BTreeMap<FrequencyIndex, Complex64>,
    ) -> Result<Self> {
        for l in values.keys() {
            if l.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: l.dim(),
                });
            }
            if !index_set.contains(l) {
                return Err(Error::OutOfRange(format!("index {:?} outside {:?}", l.0, index_set)));
            }
        }
        Ok(Self {
            dim,
            index_set,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, l: &FrequencyIndex) -> Option<Complex64> {
        self.values.get(l).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FrequencyIndex, &Complex64)> {
        self.values.iter()
    }

    pub fn map_values(&self, mut f: impl FnMut(&FrequencyIndex, Complex64) -> Complex64) -> Self {
        Self {
            dim: self.dim,
            index_set: self.index_set,
            values: self.values.iter().map(|(l, v)| (l.clone(), f(l, *v))).collect(),
        }
    }

    /// Largest `|v(-ℓ) - conj(v(ℓ))|` over pairs present in the table.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|(l, v)| self.values.get(&l.negated()).map(|m| (m - v.conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// Tabulate `comb_fourier` over the enumerated index set.
pub fn table_of(c: &DiracComb, index_set: IndexSet) -> Result<FourierTable> {
    table_of_capped(c, index_set, DEFAULT_INDEX_CAP)
}

pub fn table_of_capped(c: &DiracComb, index_set: IndexSet, cap: usize) -> Result<FourierTable> {
    if c.is_empty() {
        return Err(Error::EmptyComb);
    }
    let values = index_set
        .enumerate(c.dim(), cap)?
        .into_iter()
        .map(|l| {
            let v = comb_fourier_unchecked(c, &l);
            (l, v)
        })
        .collect();
    Ok(FourierTable {
        dim: c.dim(),
        index_set,
        values,
    })
}

/// How measurement noise is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Push every coefficient radially outward by exactly `κ`.
    WorstCaseSign,
    /// Seeded uniform sample from the radius-`κ` disk.
    UniformDisk,
    None,
}

/// Add a complex offset of modulus at most `κ` to every coefficient.
///
/// Offsets are drawn for `ℓ = 0` and the positive half-space and mirrored as
/// conjugates onto `-ℓ`, so conjugate symmetry of real signals is preserved.
pub fn perturb(table: &FourierTable, kappa: f64, mode: NoiseMode, seed: u64) -> Result<FourierTable> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::OutOfRange(format!("noise level {kappa}")));
    }
    if kappa == 0.0 || mode == NoiseMode::None {
        return Ok(table.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut offsets: BTreeMap<FrequencyIndex, Complex64> = BTreeMap::new();
    for (l, v) in table.values.iter() {
        if !(l.is_zero() || l.is_positive()) {
            continue;
        }
        let offset = match mode {
            NoiseMode::WorstCaseSign => {
                let n = v.norm();
                if n == 0.0 {
                    Complex64::new(kappa, 0.0)
                } else if l.is_zero() {
                    // keep the zero coefficient's imaginary part untouched
                    Complex64::new(kappa * v.re.signum(), 0.0)
                } else {
                    v / n * kappa
                }
            }
            NoiseMode::UniformDisk => {
                if l.is_zero() {
                    Complex64::new(rng.gen_range(-kappa..=kappa), 0.0)
                } else {
                    let r = kappa * rng.gen::<f64>().sqrt();
                    let theta = 2.0 * PI * rng.gen::<f64>();
                    Complex64::from_polar(r, theta)
                }
            }
            NoiseMode::None => unreachable!(),
        };
        if l.is_positive() {
            offsets.insert(l.negated(), offset.conj());
        }
        offsets.insert(l.clone(), offset);
    }
    Ok(table.map_values(|l, v| v + offsets.get(l).copied().unwrap_or_default()))
}

/// `argmax_ℓ |t1(ℓ) - t2(ℓ)|` and the maximum; ties go to the lexicographically smallest ℓ.
pub fn max_coeff_diff(t1: &FourierTable, t2: &FourierTable) -> Result<(FrequencyIndex, f64)> {
    if t1.dim != t2.dim || t1.index_set != t2.index_set || t1.values.len() != t2.values.len() {
        return Err(Error::IndexSetMismatch);
    }
    let mut best = (FrequencyIndex::zero(t1.dim), f64::NEG_INFINITY);
    for ((l1, v1), (l2, v2)) in t1.values.iter().zip(t2.values.iter()) {
        if l1 != l2 {
            return Err(Error::IndexSetMismatch);
        }
        let diff = (v1 - v2).norm();
        if diff > best.1 {
            best = (l1.clone(), diff);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        best.1 = 0.0;
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntryJson {
    l: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableJson {
    dim: usize,
    index_set: IndexSet,
    entries: Vec<EntryJson>,
}

impl Serialize for FourierTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableJson {
            dim: self.dim,
            index_set: self.index_set,
            entries: self
                .values
                .iter()
                .map(|(l, v)| EntryJson {
                    l: l.0.clone(),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TableJson::deserialize(d)?;
        let values = j
            .entries
            .into_iter()
            .map(|e| (FrequencyIndex(e.l), Complex64::new(e.re, e.im)))
            .collect();
        FourierTable::new(j.dim, j.index_set, values).map_err(serde::de::Error::custom)
    }
}
