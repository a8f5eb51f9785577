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

//! Polyhedra in H-representation.
//!
//! A polyhedron is the intersection of halfspaces `{x : wᵀx + b ≥ 0}`,
//! stacked as the rows `[wᵀ b]` of a matrix `H` so that `H·[x; 1] ≥ 0`.
//! Normals are stored exactly as given (never normalized); routines that
//! need Euclidean distances divide by `‖w‖` themselves.
//!
//! Emptiness here always means *empty interior*: a polyhedron whose
//! largest inscribed ball has radius below the geometric tolerance is
//! treated as empty, so measure-zero slivers never count as regions.

use crate::error::{check_dim, Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, DEFAULT_LP_TOL};

/// Default tolerance on inscribed-ball radii and membership slack.
pub const DEFAULT_GEOM_TOL: f64 = 1e-7;

/// Radius reported for a facet of a one-dimensional polyhedron (a point).
const POINT_FACET_RADIUS: f64 = 1.0;

/// The closed halfspace `{x : normal·x + offset ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    offset: f64,
}

impl Halfspace {
    /// Fails on an empty, all-zero or non-finite normal.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::EmptyInput("halfspace normal"));
        }
        if !offset.is_finite() || !normal.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if normal.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateHalfspace);
        }
        Ok(Halfspace { normal, offset })
    }

    /// Builds a halfspace from an `H` row `[w…, b]`.
    pub fn from_row(row: &[f64]) -> Result<Self> {
        match row.split_last() {
            Some((&b, w)) => Halfspace::new(w.to_vec(), b),
            None => Err(Error::EmptyInput("halfspace row")),
        }
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn norm(&self) -> f64 {
        self.normal.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `wᵀx + b`
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.offset
    }

    /// Signed Euclidean distance of `x` to the boundary (positive inside).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.eval(x) / self.norm()
    }

    /// The complementary halfspace `{x : -wᵀx - b ≥ 0}`.
    pub fn flipped(&self) -> Halfspace {
        Halfspace { normal: self.normal.iter().map(|v| -v).collect(), offset: -self.offset }
    }

    /// `[w…, b]`
    pub fn to_row(&self) -> Vec<f64> {
        let mut row = self.normal.clone();
        row.push(self.offset);
        row
    }
}

/// Center and radius of the largest ball inscribed in a polyhedron.
/// A negative radius means the polyhedron has no interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Intersection of halfspaces in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
}

impl HPolyhedron {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput("polyhedron dimension"));
        }
        for h in &rows {
            check_dim(dim, h.dim())?;
        }
        Ok(HPolyhedron { dim, rows })
    }

    /// The whole space (no rows).
    pub fn universe(dim: usize) -> Result<Self> {
        HPolyhedron::new(dim, Vec::new())
    }

    /// Axis-aligned box `lower ≤ x ≤ upper`, rows ordered `x_i ≥ lo_i, x_i ≤ hi_i`.
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        let d = lower.len();
        let mut rows = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            rows.push(Halfspace::new(e.clone(), -lower[i])?);
            e[i] = -1.0;
            rows.push(Halfspace::new(e, upper[i])?);
        }
        HPolyhedron::new(d, rows)
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        HPolyhedron::from_box(&vec![-half_width; dim], &vec![half_width; dim])
    }

    /// Builds a polyhedron from `H` rows `[w…, b]`.
    pub fn from_matrix(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| {
                check_dim(dim + 1, r.len())?;
                Halfspace::from_row(r)
            })
            .collect::<Result<Vec<_>>>()?;
        HPolyhedron::new(dim, rows)
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(Halfspace::to_row).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Smallest row value `min_i wᵢᵀx + bᵢ` (infinite when there are no rows).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|h| h.eval(x)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest signed distance to any facet hyperplane.
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|h| h.signed_distance(x)).fold(f64::INFINITY, f64::min)
    }

    /// Membership with slack: every row satisfies `wᵀx + b ≥ -tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.rows.iter().all(|h| h.eval(x) >= -tol))
    }

    pub fn chebyshev_center(&self) -> Result<Chebyshev> {
        self.chebyshev_center_near(&vec![0.0; self.dim])
    }

    /// Chebyshev center computed from an LP whose initial basis sits at
    /// `hint`. Any hint is correct; one close to the answer saves pivots.
    pub fn chebyshev_center_near(&self, hint: &[f64]) -> Result<Chebyshev> {
        check_dim(self.dim, hint.len())?;
        if self.rows.is_empty() {
            return Err(Error::Unbounded);
        }
        let d = self.dim;
        let norms: Vec<f64> = self.rows.iter().map(Halfspace::norm).collect();
        // Shift the radius so the all-slack basis is feasible:
        // r = r0 + r', x = hint + x'.
        let r0 = self.rows.iter().zip(&norms).map(|(h, n)| h.eval(hint) / n).fold(f64::INFINITY, f64::min);
        let mut objective = vec![0.0; d + 1];
        objective[d] = 1.0;
        let mut lp = LpProblem::new(objective);
        let mut row = vec![0.0; d + 1];
        for (h, &n) in self.rows.iter().zip(&norms) {
            for (dst, w) in row.iter_mut().zip(h.normal()) {
                *dst = -w;
            }
            row[d] = n;
            let rhs = (h.eval(hint) - n * r0).max(0.0);
            lp.add_constraint(&row, rhs)?;
        }
        let out = solve_lp(&lp, DEFAULT_LP_TOL)?;
        match out.status {
            LpStatus::Optimal => {
                let p = out.point.expect("optimal outcome carries a point");
                let center = hint.iter().zip(&p).map(|(h, x)| h + x).collect();
                Ok(Chebyshev { center, radius: r0 + p[d] })
            }
            LpStatus::Unbounded => Err(Error::Unbounded),
            // Cannot happen: the shifted LP starts feasible.
            LpStatus::Infeasible => Ok(Chebyshev { center: hint.to_vec(), radius: f64::NEG_INFINITY }),
        }
    }

    /// True iff no ball of radius `tol` fits inside.
    pub fn is_empty(&self, tol: f64) -> Result<bool> {
        Ok(self.chebyshev_center()?.radius < tol)
    }

    /// `(plus, minus)`: this polyhedron with `h` resp. its complement appended as last row.
    pub fn bisect(&self, h: &Halfspace) -> Result<(HPolyhedron, HPolyhedron)> {
        check_dim(self.dim, h.dim())?;
        let mut plus = self.clone();
        plus.rows.push(h.clone());
        let mut minus = self.clone();
        minus.rows.push(h.flipped());
        Ok((plus, minus))
    }

    /// Splits by `h` if the hyperplane properly cuts the interior, returning
    /// both children with their Chebyshev balls. Tangent or disjoint
    /// hyperplanes yield `None`.
    pub fn split(&self, h: &Halfspace, hint: &[f64], tol: f64) -> Result<Option<[(HPolyhedron, Chebyshev); 2]>> {
        let (plus, minus) = self.bisect(h)?;
        let cp = plus.chebyshev_center_near(hint)?;
        if cp.radius < tol {
            return Ok(None);
        }
        let cm = minus.chebyshev_center_near(hint)?;
        if cm.radius < tol {
            return Ok(None);
        }
        Ok(Some([(plus, cp), (minus, cm)]))
    }

    /// True iff the hyperplane `h = 0` has full-dimensional pieces of this
    /// polyhedron on both sides.
    pub fn intersects_hyperplane(&self, h: &Halfspace, tol: f64) -> Result<bool> {
        check_dim(self.dim, h.dim())?;
        let hint = vec![0.0; self.dim];
        Ok(self.split(h, &hint, tol)?.is_some())
    }

    /// Drops rows implied by the remaining ones, one LP per row.
    pub fn remove_redundant(&self, tol: f64) -> Result<HPolyhedron> {
        if self.rows.is_empty() {
            return Err(Error::EmptyInput("polyhedron without rows"));
        }
        let d = self.dim;
        let mut keep = vec![true; self.rows.len()];
        for i in 0..self.rows.len() {
            let target = &self.rows[i];
            // minimize wᵢᵀx subject to the other kept rows and wᵢᵀx + bᵢ ≥ -1.
            let objective = target.normal().iter().map(|w| -w).collect();
            let mut lp = LpProblem::new(objective);
            for (j, h) in self.rows.iter().enumerate() {
                if j == i || !keep[j] {
                    continue;
                }
                let row: Vec<f64> = h.normal().iter().map(|w| -w).collect();
                lp.add_constraint(&row, h.offset())?;
            }
            let row: Vec<f64> = target.normal().iter().map(|w| -w).collect();
            lp.add_constraint(&row, target.offset() + 1.0)?;
            let out = solve_lp(&lp, DEFAULT_LP_TOL)?;
            let redundant = match out.status {
                LpStatus::Optimal => {
                    let x = out.point.expect("optimal outcome carries a point");
                    target.eval(&x) >= -tol
                }
                // An infeasible remainder means the set is empty; keep the row.
                LpStatus::Infeasible | LpStatus::Unbounded => false,
            };
            if redundant {
                keep[i] = false;
            }
        }
        let rows = self.rows.iter().zip(&keep).filter(|(_, &k)| k).map(|(h, _)| h.clone()).collect();
        HPolyhedron::new(d, rows)
    }

    /// Largest ball inside this polyhedron and within the hyperplane
    /// `h = 0`, measured in the hyperplane's own `dim - 1` dimensions.
    /// In one dimension the hyperplane is a point and the radius is one.
    pub fn chebyshev_center_on(&self, h: &Halfspace) -> Result<Chebyshev> {
        check_dim(self.dim, h.dim())?;
        let d = self.dim;
        let hn = h.norm();
        let unit: Vec<f64> = h.normal().iter().map(|w| w / hn).collect();
        let mut objective = vec![0.0; d + 1];
        objective[d] = 1.0;
        let mut lp = LpProblem::new(objective);
        let mut row = vec![0.0; d + 1];
        for g in &self.rows {
            let along: f64 = g.normal().iter().zip(&unit).map(|(a, b)| a * b).sum();
            let projected = g.normal().iter().zip(&unit).map(|(a, u)| (a - along * u).powi(2)).sum::<f64>().sqrt();
            for (dst, w) in row.iter_mut().zip(g.normal()) {
                *dst = -w;
            }
            row[d] = projected;
            lp.add_constraint(&row, g.offset())?;
        }
        row[d] = 0.0;
        for (dst, w) in row.iter_mut().zip(h.normal()) {
            *dst = *w;
        }
        lp.add_constraint(&row, -h.offset())?;
        for (dst, w) in row.iter_mut().zip(h.normal()) {
            *dst = -w;
        }
        lp.add_constraint(&row, h.offset())?;
        if d == 1 {
            lp.set_bound(d, crate::lp::Bound { lower: None, upper: Some(POINT_FACET_RADIUS) })?;
        }
        let out = solve_lp(&lp, DEFAULT_LP_TOL)?;
        match out.status {
            LpStatus::Optimal => {
                let mut p = out.point.expect("optimal outcome carries a point");
                let radius = p.pop().expect("radius variable");
                Ok(Chebyshev { center: p, radius })
            }
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::Infeasible => Ok(Chebyshev { center: vec![0.0; d], radius: f64::NEG_INFINITY }),
        }
    }

    /// Axis-aligned bounding box `(lower, upper)` from `2·dim` LPs.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.dim;
        let mut lower = vec![0.0; d];
        let mut upper = vec![0.0; d];
        for i in 0..d {
            for (sign, slot) in [(1.0, &mut upper[i]), (-1.0, &mut lower[i])] {
                let mut objective = vec![0.0; d];
                objective[i] = sign;
                let mut lp = LpProblem::new(objective);
                for h in &self.rows {
                    let row: Vec<f64> = h.normal().iter().map(|w| -w).collect();
                    lp.add_constraint(&row, h.offset())?;
                }
                let out = solve_lp(&lp, DEFAULT_LP_TOL)?;
                match out.status {
                    LpStatus::Optimal => *slot = out.point.expect("optimal point")[i],
                    LpStatus::Unbounded => return Err(Error::Unbounded),
                    LpStatus::Infeasible => return Err(Error::EmptyInput("infeasible polyhedron")),
                }
            }
        }
        Ok((lower, upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> HPolyhedron {
        HPolyhedron::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn vline(x: f64) -> Halfspace {
        Halfspace::new(vec![1.0, 0.0], -x).unwrap()
    }

    #[test]
    fn chebyshev_of_unit_square() {
        let c = unit_square().chebyshev_center().unwrap();
        assert!((c.radius - 0.5).abs() < 1e-12);
        assert!((c.center[0] - 0.5).abs() < 1e-12 && (c.center[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_of_empty_set_is_negative() {
        let p = HPolyhedron::from_matrix(1, &[vec![1.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(p.chebyshev_center().unwrap().radius < 0.0);
    }

    #[test]
    fn chebyshev_of_right_triangle() {
        let p =
            HPolyhedron::from_matrix(2, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![-1.0, -1.0, 1.0]]).unwrap();
        let c = p.chebyshev_center().unwrap();
        // incircle of legs 1, 1: r = (1 + 1 - √2) / 2
        let expected = (2.0 - 2f64.sqrt()) / 2.0;
        assert!((c.radius - expected).abs() < 1e-12);
        assert!((c.radius - 1.0 / (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn unbounded_region_reports_error() {
        let p = HPolyhedron::from_matrix(1, &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(p.chebyshev_center(), Err(Error::Unbounded));
        assert_eq!(HPolyhedron::universe(2).unwrap().chebyshev_center(), Err(Error::Unbounded));
    }

    #[test]
    fn emptiness() {
        let tol = DEFAULT_GEOM_TOL;
        assert!(!unit_square().is_empty(tol).unwrap());
        let slab = unit_square().bisect(&vline(0.0)).unwrap().1;
        assert!(slab.is_empty(tol).unwrap());
        let thin = HPolyhedron::from_box(&[0.3, -4.0], &[0.3 + tol, 2.0]).unwrap();
        assert!(thin.is_empty(tol).unwrap());
    }

    #[test]
    fn membership() {
        let sq = unit_square();
        let tol = DEFAULT_GEOM_TOL;
        assert!(sq.contains(&[0.5, 0.5], tol).unwrap());
        assert!(!sq.contains(&[2.0, 0.0], tol).unwrap());
        assert!(sq.contains(&[1.0 + tol / 2.0, 0.5], tol).unwrap());
        assert!(matches!(sq.contains(&[0.5], tol), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hyperplane_intersection() {
        let sq = unit_square();
        let tol = DEFAULT_GEOM_TOL;
        assert!(sq.intersects_hyperplane(&vline(0.5), tol).unwrap());
        assert!(!sq.intersects_hyperplane(&vline(2.0), tol).unwrap());
        // supporting face: one side has no interior
        assert!(!sq.intersects_hyperplane(&vline(1.0), tol).unwrap());
        let (plus, _) = sq.bisect(&vline(1.0)).unwrap();
        assert!(plus.chebyshev_center().unwrap().radius < tol);
    }

    #[test]
    fn bisect_appends_rows() {
        let sq = unit_square();
        let h = vline(0.5);
        let (plus, minus) = sq.bisect(&h).unwrap();
        assert_eq!(&plus.rows()[..4], sq.rows());
        assert_eq!(plus.rows()[4], h);
        assert_eq!(minus.rows()[4], h.flipped());
        let cp = plus.chebyshev_center().unwrap();
        let cm = minus.chebyshev_center().unwrap();
        assert!((cp.radius - 0.25).abs() < 1e-12 && (cm.radius - 0.25).abs() < 1e-12);
        assert_eq!(plus.bounding_box().unwrap(), (vec![0.5, 0.0], vec![1.0, 1.0]));
        assert_eq!(minus.bounding_box().unwrap(), (vec![0.0, 0.0], vec![0.5, 1.0]));
        let mut both = plus.clone();
        both.rows.push(h.flipped());
        assert!(both.is_empty(DEFAULT_GEOM_TOL).unwrap());
    }

    #[test]
    fn facet_ball() {
        let sq = unit_square();
        let c = sq.chebyshev_center_on(&vline(0.5)).unwrap();
        assert!((c.radius - 0.5).abs() < 1e-12);
        assert!((c.center[0] - 0.5).abs() < 1e-12 && (c.center[1] - 0.5).abs() < 1e-12);
        assert!(sq.chebyshev_center_on(&vline(2.0)).unwrap().radius < 0.0);
        let interval = HPolyhedron::from_box(&[0.0], &[1.0]).unwrap();
        let p = interval.chebyshev_center_on(&Halfspace::new(vec![2.0], -1.0).unwrap()).unwrap();
        assert!((p.center[0] - 0.5).abs() < 1e-12 && p.radius == 1.0);
    }

    #[test]
    fn degenerate_halfspace_rejected() {
        assert_eq!(Halfspace::new(vec![0.0, 0.0], 1.0), Err(Error::DegenerateHalfspace));
        assert_eq!(Halfspace::new(vec![f64::NAN], 1.0), Err(Error::NonFiniteInput));
    }

    #[test]
    fn redundancy_removal() {
        let p = HPolyhedron::from_matrix(1, &[vec![-1.0, 1.0], vec![-1.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let q = p.remove_redundant(DEFAULT_GEOM_TOL).unwrap();
        assert_eq!(q.to_matrix(), vec![vec![-1.0, 1.0], vec![1.0, 0.0]]);
        let sq = unit_square();
        assert_eq!(sq.remove_redundant(DEFAULT_GEOM_TOL).unwrap(), sq);
        assert!(matches!(HPolyhedron::universe(1).unwrap().remove_redundant(1e-7), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn duplicate_rows_keep_one_copy() {
        let p = HPolyhedron::from_matrix(1, &[vec![-1.0, 1.0], vec![-2.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(p.remove_redundant(DEFAULT_GEOM_TOL).unwrap().num_rows(), 2);
    }
}
