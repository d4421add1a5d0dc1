//! Dense linear programming.
//!
//! A two-phase tableau simplex over bounded variables. Pivoting is Dantzig's
//! rule with lowest-index tie-breaking, falling back to Bland's rule after a
//! run of degenerate pivots, so results are deterministic for identical
//! input. Every returned assignment is re-checked against the original
//! constraints; a residual above the caller's tolerance is reported as
//! [`Error::Numerical`] instead of a wrong answer.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub coeffs: Vec<f64>,
}

/// Variables default to the bounds `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Option<Objective>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Empty when infeasible.
    pub assignment: Vec<f64>,
    pub objective_value: Option<f64>,
    pub max_residual: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: None,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<f64>) -> Result<()> {
        self.check_len(coeffs.len())?;
        self.objective = Some(Objective { sense, coeffs });
        Ok(())
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        self.check_len(coeffs.len())?;
        if !rhs.is_finite() {
            return Err(Error::OutOfRange(format!("constraint rhs {rhs}")));
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Sparse convenience form of [`add_constraint`](Self::add_constraint).
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> Result<()> {
        let mut coeffs = vec![0.0; self.num_vars];
        for &(i, a) in terms {
            if i >= self.num_vars {
                return Err(Error::OutOfRange(format!("variable {i} of {}", self.num_vars)));
            }
            coeffs[i] += a;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.num_vars || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::OutOfRange(format!("bounds [{lower}, {upper}] for variable {var}")));
        }
        self.bounds[var] = (lower, upper);
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.num_vars {
            Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: len,
            })
        } else {
            Ok(())
        }
    }

    /// Largest violation of any constraint or bound by `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> Option<f64> {
        self.objective
            .as_ref()
            .map(|o| o.coeffs.iter().zip(x).map(|(c, v)| c * v).sum())
    }

    /// Fixed-format text dump in CPLEX LP syntax, for cross-checking with external solvers.
    pub fn to_lp_text(&self) -> String {
        fn terms(coeffs: &[f64]) -> String {
            let mut s = String::new();
            for (i, &a) in coeffs.iter().enumerate() {
                if a != 0.0 {
                    let sign = if a < 0.0 { "-" } else { "+" };
                    let _ = write!(s, " {sign} {:e} x{i}", a.abs());
                }
            }
            if s.is_empty() {
                s.push_str(" 0 x0");
            }
            s
        }
        let mut out = String::new();
        match &self.objective {
            Some(o) => {
                let head = if o.sense == Sense::Maximize { "Maximize" } else { "Minimize" };
                let _ = writeln!(out, "{head}\n obj:{}", terms(&o.coeffs));
            }
            None => {
                let _ = writeln!(out, "Minimize\n obj: 0 x0");
            }
        }
        let _ = writeln!(out, "Subject To");
        for (k, c) in self.constraints.iter().enumerate() {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " c{k}:{} {rel} {:e}", terms(&c.coeffs), c.rhs);
        }
        let _ = writeln!(out, "Bounds");
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {lo:e} <= x{i} <= {hi:e}");
                }
                (true, false) => {
                    let _ = writeln!(out, " x{i} >= {lo:e}");
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= x{i} <= {hi:e}");
                }
                (false, false) => {
                    let _ = writeln!(out, " x{i} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }

    /// Solve to residual `tol`.
    pub fn solve(&self, tol: f64) -> Result<Solution> {
        if !(tol > 0.0) {
            return Err(Error::OutOfRange(format!("tolerance {tol}")));
        }
        let std = StandardForm::build(self);
        let mut tab = Tableau::new(&std);
        let phase1 = tab.phase_one()?;
        let scale = std.rhs_scale();
        if phase1 > 1e-9 * scale.max(1.0) {
            return Ok(Solution {
                status: Status::Infeasible,
                assignment: Vec::new(),
                objective_value: None,
                max_residual: f64::NAN,
                iterations: tab.iterations,
            });
        }
        tab.drop_artificials();
        if let Some(obj) = &self.objective {
            let sign = if obj.sense == Sense::Maximize { -1.0 } else { 1.0 };
            let cost: Vec<f64> = std.column_costs(&obj.coeffs).into_iter().map(|c| sign * c).collect();
            tab.phase_two(&cost)?;
        }
        let x = std.recover(&tab.column_values());
        let max_residual = self.max_residual(&x);
        if !(max_residual <= tol) {
            return Err(Error::Numerical(format!(
                "residual {max_residual:e} exceeds tolerance {tol:e}"
            )));
        }
        let objective_value = self.objective_at(&x);
        Ok(Solution {
            status: if self.objective.is_some() {
                Status::Optimal
            } else {
                Status::Feasible
            },
            assignment: x,
            objective_value,
            max_residual,
            iterations: tab.iterations,
        })
    }
}

/// How an original variable is expressed in nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + sign · col`
    Shifted { col: usize, offset: f64, sign: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    maps: Vec<VarMap>,
    num_cols: usize,
    /// Rows over structural columns with relation and rhs ≥ 0.
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut maps = Vec::with_capacity(lp.num_vars);
        let mut num_cols = 0;
        let mut upper_rows = Vec::new();
        for &(lo, hi) in &lp.bounds {
            let map = match (lo.is_finite(), hi.is_finite()) {
                (true, _) => {
                    if hi.is_finite() {
                        upper_rows.push((num_cols, hi - lo));
                    }
                    VarMap::Shifted {
                        col: num_cols,
                        offset: lo,
                        sign: 1.0,
                    }
                }
                (false, true) => VarMap::Shifted {
                    col: num_cols,
                    offset: hi,
                    sign: -1.0,
                },
                (false, false) => {
                    num_cols += 1;
                    VarMap::Split {
                        pos: num_cols - 1,
                        neg: num_cols,
                    }
                }
            };
            num_cols += 1;
            maps.push(map);
        }
        let mut rows = Vec::with_capacity(lp.constraints.len() + upper_rows.len());
        for c in &lp.constraints {
            let mut coeffs = vec![0.0; num_cols];
            let mut rhs = c.rhs;
            for (a, map) in c.coeffs.iter().zip(&maps) {
                if *a == 0.0 {
                    continue;
                }
                match *map {
                    VarMap::Shifted { col, offset, sign } => {
                        coeffs[col] += a * sign;
                        rhs -= a * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] += a;
                        coeffs[neg] -= a;
                    }
                }
            }
            rows.push((coeffs, c.relation, rhs));
        }
        for (col, width) in upper_rows {
            let mut coeffs = vec![0.0; num_cols];
            coeffs[col] = 1.0;
            rows.push((coeffs, Relation::Le, width));
        }
        for (coeffs, rel, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                coeffs.iter_mut().for_each(|a| *a = -*a);
                *rhs = -*rhs;
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        Self { maps, num_cols, rows }
    }

    fn rhs_scale(&self) -> f64 {
        self.rows.iter().map(|r| r.2).fold(0.0, f64::max)
    }

    fn column_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols];
        for (a, map) in c.iter().zip(&self.maps) {
            match *map {
                VarMap::Shifted { col, sign, .. } => out[col] += a * sign,
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        out
    }

    fn recover(&self, cols: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, offset, sign } => offset + sign * cols[col],
                VarMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect()
    }
}

/// Row-major tableau `[A | b]` with structural, slack, then artificial columns.
struct Tableau {
    m: usize,
    width: usize,
    structural: usize,
    first_artificial: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
    /// Reduced costs with the negated objective value in the last slot.
    cost: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.rows.len();
        let n_slack = std
            .rows
            .iter()
            .filter(|r| r.1 != Relation::Eq)
            .count();
        let n_art = std.rows.iter().filter(|r| r.1 != Relation::Le).count();
        let structural = std.num_cols;
        let first_artificial = structural + n_slack;
        let ncols = first_artificial + n_art;
        let width = ncols + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (structural, first_artificial);
        for (i, (coeffs, rel, rhs)) in std.rows.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..structural].copy_from_slice(coeffs);
            row[ncols] = *rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Self {
            m,
            width,
            structural,
            first_artificial,
            data,
            basis,
            active: vec![true; m],
            cost: vec![0.0; width],
            iterations: 0,
            max_iterations: 50 * (m + ncols) + 10_000,
        }
    }

    fn ncols(&self) -> usize {
        self.width - 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[c] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced costs for `cost` (minimization) given the current basis.
    fn load_cost(&mut self, cost: &[f64]) {
        let mut red = vec![0.0; self.width];
        red[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            if !self.active[i] {
                continue;
            }
            let cb = red_basis_cost(cost, self.basis[i]);
            if cb == 0.0 {
                continue;
            }
            let row = &self.data[i * self.width..(i + 1) * self.width];
            for (v, a) in red.iter_mut().zip(row) {
                *v -= cb * a;
            }
        }
        self.cost = red;
    }

    /// Run simplex iterations over columns `< limit` until optimal.
    fn iterate(&mut self, limit: usize) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..limit {
                let r = self.cost[j];
                if r < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(c) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if !self.active[i] {
                    continue;
                }
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best_ratio)) => {
                            if ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Numerical(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
        }
    }

    /// Minimize the sum of artificials; returns the phase-one optimum.
    fn phase_one(&mut self) -> Result<f64> {
        let ncols = self.ncols();
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        self.load_cost(&cost);
        match self.iterate(ncols) {
            Ok(()) => {}
            // phase one is bounded below by zero
            Err(Error::Unbounded) => return Err(Error::Numerical("unbounded phase one".into())),
            Err(e) => return Err(e),
        }
        Ok(-self.cost[ncols])
    }

    /// Pivot zero-level artificials out of the basis; drop redundant rows.
    fn drop_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.first_artificial {
                let a = self.at(i, j).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => self.pivot(i, j),
                None => self.active[i] = false,
            }
        }
    }

    fn phase_two(&mut self, cost: &[f64]) -> Result<()> {
        let mut full = vec![0.0; self.ncols()];
        full[..cost.len()].copy_from_slice(cost);
        self.load_cost(&full);
        self.iterate(self.first_artificial)
    }

    fn column_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural];
        for i in 0..self.m {
            if self.active[i] && self.basis[i] < self.structural {
                x[self.basis[i]] = self.rhs(i);
            }
        }
        x
    }
}

fn red_basis_cost(cost: &[f64], col: usize) -> f64 {
    cost.get(col).copied().unwrap_or(0.0)
}
