//   Copyright 2026 relu-dissect developers
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

//! Dense two-phase simplex for small linear programs.
//!
//! The solver targets the many tiny problems issued by the polyhedral
//! routines (a few dozen rows and columns each), so it works on a single
//! dense tableau and uses Bland's rule throughout to rule out cycling.
//! Problems are stated as
//!
//! ```text
//! maximize c·x  subject to  A·x ≤ b,  lower ≤ x ≤ upper
//! ```
//!
//! where every bound is optional (free variables by default).

use crate::error::{Error, Result};

/// Default absolute tolerance on constraint satisfaction.
pub const DEFAULT_LP_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

/// Optional box bounds on a single variable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub const FREE: Bound = Bound { lower: None, upper: None };
    pub const NONNEGATIVE: Bound = Bound { lower: Some(0.0), upper: None };
}

/// `maximize c·x s.t. A·x ≤ b` with optional per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
    bounds: Vec<Bound>,
}

impl LpProblem {
    /// Creates a problem with the given objective, no constraints and free variables.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem { objective, matrix: Vec::new(), rhs: Vec::new(), bounds: vec![Bound::FREE; n] }
    }

    /// Builds a problem from explicit rows of `A` and entries of `b`.
    pub fn from_rows(objective: Vec<f64>, rows: &[Vec<f64>], rhs: &[f64]) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::MalformedProblem(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let mut lp = LpProblem::new(objective);
        for (row, &b) in rows.iter().zip(rhs) {
            lp.add_constraint(row, b)?;
        }
        Ok(lp)
    }

    /// Appends the constraint `row·x ≤ rhs`.
    pub fn add_constraint(&mut self, row: &[f64], rhs: f64) -> Result<()> {
        if row.len() != self.num_vars() {
            return Err(Error::MalformedProblem(format!(
                "constraint has {} coefficients, expected {}",
                row.len(),
                self.num_vars()
            )));
        }
        self.matrix.extend_from_slice(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound) -> Result<()> {
        let n = self.num_vars();
        let slot = self
            .bounds
            .get_mut(var)
            .ok_or_else(|| Error::MalformedProblem(format!("bound on variable {var} of {n}")))?;
        *slot = bound;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Row `i` of the constraint matrix.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.num_vars();
        &self.matrix[i * n..(i + 1) * n]
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &f64| v.is_finite();
        if !self.objective.iter().all(finite) || !self.matrix.iter().all(finite) || !self.rhs.iter().all(finite) {
            return Err(Error::MalformedProblem("non-finite entry".into()));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            let lo_ok = b.lower.is_none_or(f64::is_finite);
            let hi_ok = b.upper.is_none_or(f64::is_finite);
            if !lo_ok || !hi_ok {
                return Err(Error::MalformedProblem(format!("non-finite bound on variable {j}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub point: Option<Vec<f64>>,
    /// Present iff `status == Optimal`.
    pub objective_value: Option<f64>,
}

impl LpOutcome {
    fn without_point(status: LpStatus) -> Self {
        LpOutcome { status, point: None, objective_value: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable is expressed through nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = shift + y
    Shifted { col: usize, shift: f64 },
    /// x = shift - y
    Mirrored { col: usize, shift: f64 },
    /// x = y⁺ - y⁻
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * (self.cols + 1) + self.cols]
    }

    /// Objective row lives after the constraint rows.
    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[pr] = pc;
    }

    /// Runs Bland's-rule simplex on the objective row, considering only
    /// columns `< allowed_cols` for entry. Returns false when unbounded.
    fn optimize(&mut self, allowed_cols: usize, pivots: &mut usize) -> Result<bool> {
        let obj = self.obj_row();
        loop {
            let entering = (0..allowed_cols).find(|&c| self.at(obj, c) < -COST_EPS);
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - 1e-14 || (ratio <= bratio + 1e-14 && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = best else {
                return Ok(false);
            };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
        }
    }
}

/// Solves `problem` with the dense two-phase simplex method.
///
/// `tol` is the absolute feasibility tolerance used to decide
/// infeasibility at the end of phase one (scaled by the largest
/// right-hand side magnitude when that exceeds one).
pub fn solve_lp(problem: &LpProblem, tol: f64) -> Result<LpOutcome> {
    problem.validate()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::MalformedProblem("tolerance must be positive".into()));
    }
    let n = problem.num_vars();

    // Map every original variable onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols_struct = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for b in &problem.bounds {
        match (b.lower, b.upper) {
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    if hi < lo {
                        return Ok(LpOutcome::without_point(LpStatus::Infeasible));
                    }
                    bound_rows.push((ncols_struct, hi - lo));
                }
                maps.push(VarMap::Shifted { col: ncols_struct, shift: lo });
                ncols_struct += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Mirrored { col: ncols_struct, shift: hi });
                ncols_struct += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols_struct, neg: ncols_struct + 1 });
                ncols_struct += 2;
            }
        }
    }

    let m = problem.num_constraints() + bound_rows.len();
    // Transformed constraint rows over structural columns.
    let mut a_struct = vec![0.0; m * ncols_struct];
    let mut b_struct = vec![0.0; m];
    for i in 0..problem.num_constraints() {
        let row = problem.row(i);
        let mut rhs = problem.rhs[i];
        let out = &mut a_struct[i * ncols_struct..(i + 1) * ncols_struct];
        for (j, &a) in row.iter().enumerate() {
            match maps[j] {
                VarMap::Shifted { col, shift } => {
                    out[col] += a;
                    rhs -= a * shift;
                }
                VarMap::Mirrored { col, shift } => {
                    out[col] -= a;
                    rhs -= a * shift;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        b_struct[i] = rhs;
    }
    for (k, &(col, width)) in bound_rows.iter().enumerate() {
        let i = problem.num_constraints() + k;
        a_struct[i * ncols_struct + col] = 1.0;
        b_struct[i] = width;
    }

    let negative_rows: Vec<usize> = (0..m).filter(|&i| b_struct[i] < 0.0).collect();
    let n_art = negative_rows.len();
    let cols = ncols_struct + m + n_art;
    let w = cols + 1;
    let mut tab = Tableau { rows: m, cols, data: vec![0.0; (m + 1) * w], basis: vec![0; m] };
    let mut art_of_row = vec![usize::MAX; m];
    for (k, &i) in negative_rows.iter().enumerate() {
        art_of_row[i] = ncols_struct + m + k;
    }
    for i in 0..m {
        let sign = if b_struct[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab.data[i * w..(i + 1) * w];
        for j in 0..ncols_struct {
            row[j] = sign * a_struct[i * ncols_struct + j];
        }
        row[ncols_struct + i] = sign;
        row[cols] = sign * b_struct[i];
        if art_of_row[i] != usize::MAX {
            row[art_of_row[i]] = 1.0;
            tab.basis[i] = art_of_row[i];
        } else {
            tab.basis[i] = ncols_struct + i;
        }
    }

    let mut pivots = 0usize;
    let scale = b_struct.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    if n_art > 0 {
        // Phase one: maximize -Σ artificials.
        let obj = tab.obj_row();
        for k in 0..n_art {
            tab.data[obj * w + ncols_struct + m + k] = 1.0;
        }
        for &i in &negative_rows {
            for c in 0..w {
                let v = tab.data[i * w + c];
                tab.data[obj * w + c] -= v;
            }
        }
        tab.optimize(cols, &mut pivots)?;
        let phase_one = tab.data[obj * w + cols];
        if phase_one < -tol * scale {
            return Ok(LpOutcome::without_point(LpStatus::Infeasible));
        }
        // Drive artificials out of the basis where possible.
        let first_art = ncols_struct + m;
        for r in 0..m {
            if tab.basis[r] >= first_art {
                let col = (0..first_art)
                    .filter(|&c| tab.at(r, c).abs() > PIVOT_EPS)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
                if let Some(c) = col {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase two over structural and slack columns.
    let first_art = ncols_struct + m;
    let obj = tab.obj_row();
    let mut cost = vec![0.0; ncols_struct];
    for (j, map) in maps.iter().enumerate() {
        let c = problem.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Mirrored { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    for c in 0..w {
        tab.data[obj * w + c] = 0.0;
    }
    for (j, &c) in cost.iter().enumerate() {
        tab.data[obj * w + j] = -c;
    }
    for r in 0..m {
        let b = tab.basis[r];
        let f = tab.data[obj * w + b];
        if f != 0.0 {
            let (head, tail) = tab.data.split_at_mut(obj * w);
            let src = &head[r * w..(r + 1) * w];
            for (x, s) in tail[..w].iter_mut().zip(src) {
                *x -= f * s;
            }
        }
    }
    if !tab.optimize(first_art, &mut pivots)? {
        return Ok(LpOutcome::without_point(LpStatus::Unbounded));
    }

    let mut y = vec![0.0; cols];
    for r in 0..m {
        y[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let point: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, shift } => shift + y[col],
            VarMap::Mirrored { col, shift } => shift - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let value = point.iter().zip(&problem.objective).map(|(x, c)| x * c).sum();
    Ok(LpOutcome { status: LpStatus::Optimal, point: Some(point), objective_value: Some(value) })
}

/// True iff `{x : A·x ≤ b}` is nonempty.
pub fn feasible(rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> Result<bool> {
    let n = rows.first().map_or(0, Vec::len);
    let lp = LpProblem::from_rows(vec![0.0; n], rows, rhs)?;
    // A zero objective can never be unbounded.
    Ok(solve_lp(&lp, tol)?.status != LpStatus::Infeasible)
}
