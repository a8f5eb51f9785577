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

//! Cells of a hyperplane arrangement restricted to a polyhedron.
//!
//! Hyperplanes are inserted one at a time into a binary tree of regions.
//! A hyperplane that misses a node's region misses every region below it,
//! so whole subtrees are skipped; intersected leaves are bisected.

use std::cmp::Ordering;

use crate::error::{check_dim, Error, Result};
use crate::polyhedra::{Chebyshev, HPolyhedron, Halfspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }

    /// Positive for `value ≥ 0`.
    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

pub fn sign_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.as_char()).collect()
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub region: HPolyhedron,
    pub ball: Chebyshev,
    /// Index of the (deduplicated) hyperplane that split this node.
    pub split: Option<usize>,
    /// `[positive side, negative side]`
    pub children: Option<[usize; 2]>,
}

/// Arena-backed binary tree of bisected regions; node 0 is the root.
#[derive(Debug, Clone)]
pub struct RegionTree {
    nodes: Vec<TreeNode>,
}

impl RegionTree {
    fn new(region: HPolyhedron, ball: Chebyshev) -> Self {
        RegionTree { nodes: vec![TreeNode { region, ball, split: None, children: None }] }
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_none()).count()
    }
}

/// One cell of the arrangement.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub region: HPolyhedron,
    /// One entry per input hyperplane, in input order.
    pub signs: Vec<Sign>,
    pub ball: Chebyshev,
}

#[derive(Debug, Clone)]
pub struct ArrangementResult {
    /// Cells in lexicographic order of their sign vectors.
    pub cells: Vec<Cell>,
    /// For each input hyperplane: its representative after merging
    /// coincident hyperplanes, and whether it points the other way.
    pub representatives: Vec<(usize, bool)>,
    pub tree: RegionTree,
}

/// Merges hyperplanes that coincide after normalization (within `tol`).
/// Returns the distinct hyperplanes and, per input, `(representative, flipped)`.
fn dedup_hyperplanes(hyperplanes: &[Halfspace], tol: f64) -> (Vec<Halfspace>, Vec<(usize, bool)>) {
    let mut reps: Vec<Halfspace> = Vec::new();
    let mut normalized: Vec<Vec<f64>> = Vec::new();
    let mut map = Vec::with_capacity(hyperplanes.len());
    for h in hyperplanes {
        let n = h.norm();
        let row: Vec<f64> = h.to_row().iter().map(|v| v / n).collect();
        let found = normalized.iter().enumerate().find_map(|(k, r)| {
            let same = r.iter().zip(&row).all(|(a, b)| (a - b).abs() <= tol);
            let opposite = r.iter().zip(&row).all(|(a, b)| (a + b).abs() <= tol);
            match (same, opposite) {
                (true, _) => Some((k, false)),
                (_, true) => Some((k, true)),
                _ => None,
            }
        });
        match found {
            Some(entry) => map.push(entry),
            None => {
                map.push((reps.len(), false));
                reps.push(h.clone());
                normalized.push(row);
            }
        }
    }
    (reps, map)
}

/// Decides whether `h` properly cuts the region of `node` without an LP,
/// when the node's inscribed ball already straddles the hyperplane with
/// room for a `tol` ball on each side.
fn ball_straddles(ball: &Chebyshev, h: &Halfspace, tol: f64) -> bool {
    let dist = h.signed_distance(&ball.center).abs();
    dist < ball.radius && (ball.radius - dist) / 2.0 >= tol
}

fn validate(root: &HPolyhedron, hyperplanes: &[Halfspace], tol: f64) -> Result<Chebyshev> {
    for h in hyperplanes {
        check_dim(root.dim(), h.dim())?;
    }
    let ball = root.chebyshev_center()?;
    if ball.radius < tol {
        return Err(Error::EmptyRoot);
    }
    Ok(ball)
}

/// Cells of the arrangement of `hyperplanes` inside `root`.
///
/// Hyperplanes are processed in input order. Children whose interior has
/// no ball of radius `tol` are never created, so tangent hyperplanes do not
/// split a region.
pub fn get_regions(root: &HPolyhedron, hyperplanes: &[Halfspace], tol: f64) -> Result<ArrangementResult> {
    let root_ball = validate(root, hyperplanes, tol)?;
    get_regions_from(root, root_ball, hyperplanes, tol)
}

/// [`get_regions`] with the root's Chebyshev ball already known.
pub(crate) fn get_regions_from(
    root: &HPolyhedron,
    root_ball: Chebyshev,
    hyperplanes: &[Halfspace],
    tol: f64,
) -> Result<ArrangementResult> {
    for h in hyperplanes {
        check_dim(root.dim(), h.dim())?;
    }
    let (reps, representatives) = dedup_hyperplanes(hyperplanes, tol);
    let mut tree = RegionTree::new(root.clone(), root_ball);

    let mut stack = Vec::new();
    for (k, h) in reps.iter().enumerate() {
        stack.clear();
        stack.push(0usize);
        while let Some(idx) = stack.pop() {
            let node = &tree.nodes[idx];
            match node.children {
                Some([pos, neg]) => {
                    let hit =
                        ball_straddles(&node.ball, h, tol) || node.region.split(h, &node.ball.center, tol)?.is_some();
                    if hit {
                        stack.push(neg);
                        stack.push(pos);
                    }
                }
                None => {
                    if let Some([(plus, bp), (minus, bm)]) = node.region.split(h, &node.ball.center, tol)? {
                        let first = tree.nodes.len();
                        tree.nodes.push(TreeNode { region: plus, ball: bp, split: None, children: None });
                        tree.nodes.push(TreeNode { region: minus, ball: bm, split: None, children: None });
                        let node = &mut tree.nodes[idx];
                        node.split = Some(k);
                        node.children = Some([first, first + 1]);
                    }
                }
            }
        }
    }

    let mut cells = Vec::with_capacity(tree.leaf_count());
    let mut walk = vec![(0usize, vec![None::<Sign>; reps.len()])];
    while let Some((idx, signs)) = walk.pop() {
        let node = &tree.nodes[idx];
        match (node.children, node.split) {
            (Some([pos, neg]), Some(k)) => {
                let mut sp = signs.clone();
                sp[k] = Some(Sign::Positive);
                let mut sn = signs;
                sn[k] = Some(Sign::Negative);
                walk.push((neg, sn));
                walk.push((pos, sp));
            }
            _ => cells.push(make_cell(node.region.clone(), node.ball.clone(), &signs, &reps, &representatives)),
        }
    }
    sort_cells(&mut cells);
    Ok(ArrangementResult { cells, representatives, tree })
}

fn make_cell(
    region: HPolyhedron,
    ball: Chebyshev,
    rep_signs: &[Option<Sign>],
    reps: &[Halfspace],
    representatives: &[(usize, bool)],
) -> Cell {
    let resolved: Vec<Sign> =
        rep_signs.iter().zip(reps).map(|(s, h)| s.unwrap_or_else(|| Sign::of(h.eval(&ball.center)))).collect();
    let signs =
        representatives.iter().map(|&(k, flipped)| if flipped { resolved[k].flip() } else { resolved[k] }).collect();
    Cell { region, signs, ball }
}

fn cmp_rows(a: &HPolyhedron, b: &HPolyhedron) -> Ordering {
    let ra = a.rows().iter().flat_map(|h| h.normal().iter().copied().chain([h.offset()]));
    let rb = b.rows().iter().flat_map(|h| h.normal().iter().copied().chain([h.offset()]));
    ra.zip(rb).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne()).unwrap_or_else(|| a.num_rows().cmp(&b.num_rows()))
}

fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| a.signs.cmp(&b.signs).then_with(|| cmp_rows(&a.region, &b.region)));
}

/// Same cells as [`get_regions`], computed without the tree: every current
/// cell is tested against every hyperplane.
pub fn get_regions_flat(root: &HPolyhedron, hyperplanes: &[Halfspace], tol: f64) -> Result<Vec<Cell>> {
    let root_ball = validate(root, hyperplanes, tol)?;
    let (reps, representatives) = dedup_hyperplanes(hyperplanes, tol);
    let mut current = vec![(root.clone(), root_ball, vec![None::<Sign>; reps.len()])];
    for (k, h) in reps.iter().enumerate() {
        let mut next = Vec::with_capacity(current.len() * 2);
        for (region, ball, signs) in current {
            match region.split(h, &ball.center, tol)? {
                Some([(plus, bp), (minus, bm)]) => {
                    let mut sp = signs.clone();
                    sp[k] = Some(Sign::Positive);
                    let mut sn = signs;
                    sn[k] = Some(Sign::Negative);
                    next.push((plus, bp, sp));
                    next.push((minus, bm, sn));
                }
                None => next.push((region, ball, signs)),
            }
        }
        current = next;
    }
    let mut cells: Vec<Cell> = current
        .into_iter()
        .map(|(region, ball, signs)| make_cell(region, ball, &signs, &reps, &representatives))
        .collect();
    sort_cells(&mut cells);
    Ok(cells)
}

/// Maximal number of cells cut out by `n` hyperplanes in `d` dimensions:
/// `Σ_{j=0}^{d} C(n, j)`.
pub fn zaslavsky_bound(n: u64, d: u64) -> Result<u128> {
    if d == 0 {
        return Err(Error::OutOfRange("dimension must be at least 1".into()));
    }
    let overflow = || Error::OutOfRange(format!("bound for n={n}, d={d} exceeds 128 bits"));
    let mut total: u128 = 1;
    let mut binom: u128 = 1;
    for j in 1..=d.min(n) {
        // C(n, j) = C(n, j-1) * (n - j + 1) / j, exact at every step
        binom = binom.checked_mul(u128::from(n - j + 1)).ok_or_else(overflow)? / u128::from(j);
        total = total.checked_add(binom).ok_or_else(overflow)?;
    }
    Ok(total)
}
