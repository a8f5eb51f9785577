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

//! Conversion of a network into its explicit piecewise-affine form.
//!
//! The converter keeps a working set of `(region, P)` pairs, where `P` is
//! the homogeneous matrix computed by the network prefix on that region.
//! A dense node left-multiplies every `P` by the node's homogeneous matrix.
//! A ReLU node turns every row of `P` into a hyperplane in input
//! coordinates, splits the region by the arrangement of those hyperplanes,
//! and zeroes the rows that are negative at each subregion's interior
//! point.

use std::cmp::Ordering;
use std::fmt;

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{get_regions_from, zaslavsky_bound, Sign};
use crate::error::{check_dim, Error, Result};
use crate::network::{LayerNode, Network};
use crate::polyhedra::{Chebyshev, HPolyhedron, Halfspace, DEFAULT_GEOM_TOL};

/// Default half width of the conversion domain `[-B, B]^d`.
pub const DEFAULT_BOX: f64 = 10.0;

/// Rows of `P` whose input normal is shorter than this are treated as
/// constant on the region.
pub const DEFAULT_DEGENERATE_TOL: f64 = 1e-12;

/// Active (`+`) or inactive (`-`) state of every ReLU neuron, in network order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ActivationPattern(pub Vec<Sign>);

impl ActivationPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Sign::Positive),
                '-' => Ok(Sign::Negative),
                other => Err(Error::Schema(format!("invalid pattern character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(ActivationPattern)
    }

    /// Splits the flat pattern into one slice per ReLU node.
    pub fn per_node<'a>(&'a self, widths: &'a [usize]) -> impl Iterator<Item = &'a [Sign]> + 'a {
        let mut start = 0;
        widths.iter().map(move |&w| {
            let s = &self.0[start..start + w];
            start += w;
            s
        })
    }
}

impl fmt::Display for ActivationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// A polyhedral region together with the affine map computed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegion {
    pub region: HPolyhedron,
    /// Homogeneous `(m+1) × (d+1)` matrix mapping `[x; 1]` to `[y; 1]`.
    pub matrix: DMatrix<f64>,
    pub pattern: ActivationPattern,
}

impl LinearRegion {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.matrix.nrows() - 1;
        let d = x.len();
        (0..m).map(|i| (0..d).map(|j| self.matrix[(i, j)] * x[j]).sum::<f64>() + self.matrix[(i, d)]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwaFunction {
    pub input_dim: usize,
    pub output_dim: usize,
    pub domain: HPolyhedron,
    /// Ordered by activation pattern.
    pub regions: Vec<LinearRegion>,
}

#[derive(Debug, Clone)]
pub struct ConvertOptions {
    pub geom_tol: f64,
    pub degenerate_tol: f64,
    /// `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    pub remove_redundant: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        ConvertOptions {
            geom_tol: DEFAULT_GEOM_TOL,
            degenerate_tol: DEFAULT_DEGENERATE_TOL,
            workers: None,
            remove_redundant: false,
        }
    }
}

/// Per-ReLU-node statistics gathered during conversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTrace {
    pub width: usize,
    pub regions_after: usize,
    /// Largest number of subregions produced from one region.
    pub max_split: usize,
}

/// Rows of a homogeneous matrix seen as hyperplanes in input coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronBoundaries {
    /// `(neuron index, boundary)` for every row with a usable normal.
    pub hyperplanes: Vec<(usize, Halfspace)>,
    /// `(neuron index, offset)` for rows constant on the whole space.
    pub constant: Vec<(usize, f64)>,
}

/// Reads the first `node_width` rows `(w̃ᵀ, b̃)` of `p` as boundaries
/// `w̃ᵀx + b̃ = 0`. Rows with `‖w̃‖ < tol` are reported as constant.
pub fn neuron_hyperplanes(p: &DMatrix<f64>, node_width: usize, tol: f64) -> NeuronBoundaries {
    let d = p.ncols() - 1;
    let mut hyperplanes = Vec::with_capacity(node_width);
    let mut constant = Vec::new();
    for i in 0..node_width.min(p.nrows()) {
        let normal: Vec<f64> = (0..d).map(|j| p[(i, j)]).collect();
        let offset = p[(i, d)];
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        match Halfspace::new(normal, offset) {
            Ok(h) if norm >= tol => hyperplanes.push((i, h)),
            _ => constant.push((i, offset)),
        }
    }
    NeuronBoundaries { hyperplanes, constant }
}

/// Copy of `p` with the listed rows set to zero. The homogeneous last row
/// may not be listed.
pub fn apply_pattern(p: &DMatrix<f64>, inactive_rows: &[usize]) -> Result<DMatrix<f64>> {
    let width = p.nrows().saturating_sub(1);
    let mut out = p.clone();
    for &r in inactive_rows {
        if r >= width {
            return Err(Error::IndexOutOfRange { index: r, width });
        }
        out.row_mut(r).fill(0.0);
    }
    Ok(out)
}

struct Work {
    region: HPolyhedron,
    ball: Chebyshev,
    matrix: DMatrix<f64>,
    pattern: Vec<Sign>,
}

fn homogeneous_point(x: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len() + 1, x.iter().copied().chain([1.0]))
}

fn split_region(work: Work, width: usize, opts: &ConvertOptions) -> Result<Vec<Work>> {
    let bounds = neuron_hyperplanes(&work.matrix, width, opts.degenerate_tol);
    let planes: Vec<Halfspace> = bounds.hyperplanes.iter().map(|(_, h)| h.clone()).collect();
    let arrangement = get_regions_from(&work.region, work.ball.clone(), &planes, opts.geom_tol)?;
    let mut constant_sign = vec![None; width];
    for &(i, offset) in &bounds.constant {
        constant_sign[i] = Some(Sign::of(offset));
    }
    let mut out = Vec::with_capacity(arrangement.cells.len());
    for cell in arrangement.cells {
        let z = &work.matrix * homogeneous_point(&cell.ball.center);
        let signs: Vec<Sign> = (0..width).map(|i| constant_sign[i].unwrap_or_else(|| Sign::of(z[i]))).collect();
        let inactive: Vec<usize> = (0..width).filter(|&i| signs[i] == Sign::Negative).collect();
        let matrix = apply_pattern(&work.matrix, &inactive)?;
        let mut pattern = work.pattern.clone();
        pattern.extend(signs);
        out.push(Work { region: cell.region, ball: cell.ball, matrix, pattern });
    }
    Ok(out)
}

/// Exact piecewise-affine form of `net` over `domain`.
pub fn convert(net: &Network, domain: &HPolyhedron, opts: &ConvertOptions) -> Result<PwaFunction> {
    convert_traced(net, domain, opts).map(|(pwa, _)| pwa)
}

/// Like [`convert`], also returning per-ReLU-node statistics.
pub fn convert_traced(
    net: &Network,
    domain: &HPolyhedron,
    opts: &ConvertOptions,
) -> Result<(PwaFunction, Vec<LayerTrace>)> {
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::OutOfRange(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| convert_inner(net, domain, opts))
        }
        None => convert_inner(net, domain, opts),
    }
}

fn convert_inner(net: &Network, domain: &HPolyhedron, opts: &ConvertOptions) -> Result<(PwaFunction, Vec<LayerTrace>)> {
    check_dim(net.input_dim(), domain.dim())?;
    let d = net.input_dim();
    let ball = match domain.chebyshev_center() {
        Ok(b) => b,
        Err(Error::Unbounded) => return Err(Error::UnboundedDomain),
        Err(e) => return Err(e),
    };
    if ball.radius < opts.geom_tol {
        return Err(Error::EmptyDomain);
    }
    let mut working =
        vec![Work { region: domain.clone(), ball, matrix: DMatrix::identity(d + 1, d + 1), pattern: Vec::new() }];
    let mut trace = Vec::new();
    let mut width = d;
    for (k, layer) in net.layers().iter().enumerate() {
        match layer {
            LayerNode::Dense(dense) => {
                let t = dense.homogeneous();
                working.par_iter_mut().for_each(|w| w.matrix = &t * &w.matrix);
                width = dense.out_dim();
            }
            LayerNode::Relu => {
                let parts: Vec<Vec<Work>> =
                    working.into_par_iter().map(|w| split_region(w, width, opts)).collect::<Result<_>>()?;
                let max_split = parts.iter().map(Vec::len).max().unwrap_or(0);
                working = parts.into_iter().flatten().collect();
                debug!("node {k}: relu width {width}, {} regions", working.len());
                trace.push(LayerTrace { width, regions_after: working.len(), max_split });
            }
        }
    }
    let mut regions: Vec<LinearRegion> = working
        .into_par_iter()
        .map(|w| {
            let region = if opts.remove_redundant { w.region.remove_redundant(opts.geom_tol)? } else { w.region };
            Ok(LinearRegion { region, matrix: w.matrix, pattern: ActivationPattern(w.pattern) })
        })
        .collect::<Result<_>>()?;
    regions.sort_by(cmp_regions);
    let pwa = PwaFunction { input_dim: d, output_dim: net.output_dim(), domain: domain.clone(), regions };
    Ok((pwa, trace))
}

fn cmp_regions(a: &LinearRegion, b: &LinearRegion) -> Ordering {
    let flat = |r: &LinearRegion| {
        r.region
            .rows()
            .iter()
            .flat_map(|h| h.normal().iter().copied().chain([h.offset()]))
            .chain(r.matrix.iter().copied())
            .collect::<Vec<f64>>()
    };
    a.pattern.cmp(&b.pattern).then_with(|| {
        let (fa, fb) = (flat(a), flat(b));
        fa.iter().zip(&fb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or_else(|| fa.len().cmp(&fb.len()))
    })
}

/// Square box domain `[-half_width, half_width]^dim`.
pub fn box_domain(dim: usize, half_width: f64) -> Result<HPolyhedron> {
    HPolyhedron::cube(dim, half_width)
}

impl PwaFunction {
    /// Index of the first region containing `x`. Exact membership is
    /// preferred; otherwise the first region within `tol` is returned.
    pub fn region_of(&self, x: &[f64], tol: f64) -> Result<usize> {
        check_dim(self.input_dim, x.len())?;
        self.regions
            .iter()
            .position(|r| r.region.rows().iter().rev().all(|h| h.eval(x) >= 0.0))
            .or_else(|| self.regions.iter().position(|r| r.region.rows().iter().rev().all(|h| h.eval(x) >= -tol)))
            .ok_or(Error::OutsideDomain)
    }

    /// Evaluates the stored affine map of the region containing `x`.
    pub fn eval(&self, x: &[f64], tol: f64) -> Result<Vec<f64>> {
        let i = self.region_of(x, tol)?;
        Ok(self.regions[i].apply(x))
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn to_doc(&self) -> PwaDoc {
        PwaDoc {
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            domain: RegionDoc { h: self.domain.to_matrix() },
            regions: self
                .regions
                .iter()
                .map(|r| LinearRegionDoc {
                    h: r.region.to_matrix(),
                    p: r.matrix.row_iter().map(|row| row.iter().copied().collect()).collect(),
                    pattern: r.pattern.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("pwa serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: PwaDoc = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        PwaFunction::try_from(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwaDoc {
    pub input_dim: usize,
    pub output_dim: usize,
    pub domain: RegionDoc,
    pub regions: Vec<LinearRegionDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDoc {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegionDoc {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub pattern: String,
}

impl TryFrom<PwaDoc> for PwaFunction {
    type Error = Error;

    fn try_from(doc: PwaDoc) -> Result<Self> {
        let d = doc.input_dim;
        let m = doc.output_dim;
        let schema = |e: Error| Error::Schema(e.to_string());
        let domain = HPolyhedron::from_matrix(d, &doc.domain.h).map_err(schema)?;
        let mut regions = Vec::with_capacity(doc.regions.len());
        for (k, r) in doc.regions.into_iter().enumerate() {
            let region = HPolyhedron::from_matrix(d, &r.h).map_err(|e| Error::Schema(format!("region {k}: {e}")))?;
            if r.p.len() != m + 1 || r.p.iter().any(|row| row.len() != d + 1) {
                return Err(Error::Schema(format!("region {k}: P must be {}x{}", m + 1, d + 1)));
            }
            if !r.p.iter().flatten().all(|v| v.is_finite()) {
                return Err(Error::Schema(format!("region {k}: non-finite P entry")));
            }
            let matrix = DMatrix::from_row_iterator(m + 1, d + 1, r.p.into_iter().flatten());
            let pattern = ActivationPattern::parse(&r.pattern)?;
            regions.push(LinearRegion { region, matrix, pattern });
        }
        Ok(PwaFunction { input_dim: d, output_dim: m, domain, regions })
    }
}

/// Bound on the subregions one ReLU node of `width` neurons can create
/// from a single `d`-dimensional region.
pub fn layer_bound(width: usize, d: usize) -> Result<u128> {
    zaslavsky_bound(width as u64, d as u64)
}
