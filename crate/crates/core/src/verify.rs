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

//! Sampling-based checks that a PWA function reproduces its network.
//!
//! Each check draws its points from a seeded generator and returns a
//! serializable report that records the seed, tolerance and outcome.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::Sign;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::polyhedra::{HPolyhedron, DEFAULT_GEOM_TOL};
use crate::pwa::{layer_bound, PwaFunction};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-9;
pub const DEFAULT_CONTINUITY_TOL: f64 = 1e-8;
pub const DEFAULT_CONTINUITY_PAIRS: usize = 100;
const FACET_POINTS: usize = 10;

/// Uniform samples from `domain`, by rejection from its bounding box.
pub fn sample_domain(domain: &HPolyhedron, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = domain.bounding_box()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while out.len() < samples {
        attempts += 1;
        if attempts > samples.saturating_mul(1000).max(1000) {
            return Err(Error::DomainMismatch("domain too thin to sample".into()));
        }
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(&a, &b)| if b > a { rng.random_range(a..b) } else { a }).collect();
        if domain.contains(&x, 0.0)? {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub check: &'static str,
    pub pass: bool,
    /// Largest `|forward(x) - pwa(x)|_∞` over the samples.
    pub metric: f64,
    pub argmax_point: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl EquivalenceReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.metric
    }
}

/// Compares `net.forward` with `pwa.eval` on uniform domain samples.
pub fn check_equivalence(
    net: &Network,
    pwa: &PwaFunction,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<EquivalenceReport> {
    if net.input_dim() != pwa.input_dim || net.output_dim() != pwa.output_dim {
        return Err(Error::DomainMismatch(format!(
            "network is {}→{}, pwa is {}→{}",
            net.input_dim(),
            net.output_dim(),
            pwa.input_dim,
            pwa.output_dim
        )));
    }
    if samples == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    let points = sample_domain(&pwa.domain, samples, seed)?;
    let diffs = points
        .par_iter()
        .map(|x| {
            let f = net.forward(x)?;
            Ok(match pwa.eval(x, DEFAULT_GEOM_TOL) {
                Ok(y) => f.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                Err(Error::OutsideDomain) => f64::INFINITY,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (idx, &worst) =
        diffs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).expect("at least one sample");
    Ok(EquivalenceReport {
        check: "equivalence",
        pass: worst < tol,
        metric: worst,
        argmax_point: points[idx].clone(),
        samples,
        seed,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub check: &'static str,
    pub pass: bool,
    /// `uncovered + multiply_covered_interior`
    pub metric: usize,
    pub uncovered: usize,
    pub multiply_covered_interior: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

/// Counts domain samples covered by no region, and samples lying deeper
/// than `tol` inside more than one region.
pub fn check_partition(pwa: &PwaFunction, samples: usize, seed: u64, tol: f64) -> Result<PartitionReport> {
    let points = sample_domain(&pwa.domain, samples, seed)?;
    let (uncovered, multiple) = points
        .par_iter()
        .map(|x| {
            let mut covering =
                pwa.regions.iter().filter(|r| r.region.rows().iter().rev().all(|h| h.eval(x) >= -tol)).peekable();
            let covered = covering.peek().is_some();
            let interior = covering.filter(|r| r.region.depth(x) > tol).take(2).count();
            (usize::from(!covered), usize::from(interior > 1))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(PartitionReport {
        check: "partition",
        pass: uncovered == 0 && multiple == 0,
        metric: uncovered + multiple,
        uncovered,
        multiply_covered_interior: multiple,
        samples,
        seed,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub check: &'static str,
    pub pass: bool,
    /// Largest disagreement between neighbouring maps on a shared facet.
    pub metric: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub points_checked: usize,
    pub seed: u64,
    pub tol: f64,
}

/// Neighbouring regions `(i, j)` across facets of region `i`, with the
/// facet center used to find `j`.
fn neighbour_across(pwa: &PwaFunction, i: usize, row: usize) -> Result<Option<usize>> {
    let region = &pwa.regions[i].region;
    let h = &region.rows()[row];
    let facet = region.chebyshev_center_on(h)?;
    if facet.radius < DEFAULT_GEOM_TOL {
        return Ok(None);
    }
    let n = h.norm();
    let step = 1e-6 * facet.radius.min(1.0);
    let probe: Vec<f64> = facet.center.iter().zip(h.normal()).map(|(c, w)| c - step * w / n).collect();
    if !pwa.domain.contains(&probe, 0.0)? {
        return Ok(None);
    }
    Ok(match pwa.region_of(&probe, 0.0) {
        Ok(j) if j != i => Some(j),
        _ => None,
    })
}

/// Samples points on facets shared by adjacent regions and compares the
/// two affine maps there. Adjacency is discovered by stepping across each
/// facet of a region; up to `pairs` distinct pairs are examined, visiting
/// candidate facets in a seeded random order.
pub fn check_continuity(pwa: &PwaFunction, pairs: usize, seed: u64, tol: f64) -> Result<ContinuityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(usize, usize)> =
        pwa.regions.iter().enumerate().flat_map(|(i, r)| (0..r.region.num_rows()).map(move |k| (i, k))).collect();
    candidates.shuffle(&mut rng);

    let mut seen = BTreeSet::new();
    let mut pairs_checked = 0;
    let mut points_checked = 0;
    let mut worst = 0.0f64;
    let mut worst_pair = None;
    let d = pwa.input_dim;
    for (i, k) in candidates {
        if pairs_checked >= pairs {
            break;
        }
        let Some(j) = neighbour_across(pwa, i, k)? else {
            continue;
        };
        if !seen.insert((i.min(j), i.max(j))) {
            continue;
        }
        let h = &pwa.regions[i].region.rows()[k];
        let both = HPolyhedron::new(
            d,
            pwa.regions[i].region.rows().iter().chain(pwa.regions[j].region.rows()).cloned().collect(),
        )?;
        let facet = both.chebyshev_center_on(h)?;
        if facet.radius < DEFAULT_GEOM_TOL {
            continue;
        }
        pairs_checked += 1;
        let n = h.norm();
        let unit: Vec<f64> = h.normal().iter().map(|w| w / n).collect();
        for _ in 0..FACET_POINTS {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let along: f64 = g.iter().zip(&unit).map(|(a, b)| a * b).sum();
            let mut u: Vec<f64> = g.iter().zip(&unit).map(|(a, b)| a - along * b).collect();
            let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if un > 0.0 {
                u.iter_mut().for_each(|v| *v /= un);
            }
            let s = rng.random_range(0.0..0.9) * facet.radius.min(1e3);
            let x: Vec<f64> = facet.center.iter().zip(&u).map(|(c, v)| c + s * v).collect();
            let a = pwa.regions[i].apply(&x);
            let b = pwa.regions[j].apply(&x);
            let jump = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            points_checked += 1;
            if jump > worst || worst_pair.is_none() {
                worst = worst.max(jump);
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(ContinuityReport {
        check: "continuity",
        pass: worst < tol,
        metric: worst,
        worst_pair,
        pairs_checked,
        points_checked,
        seed,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCount {
    pub width: usize,
    pub regions: usize,
    /// Most subregions created from one region of the previous layer.
    pub max_split: usize,
    pub bound: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub check: &'static str,
    pub pass: bool,
    pub metric: usize,
    pub region_count: usize,
    pub per_layer_counts: Vec<LayerCount>,
    /// Product of the per-layer bounds; `None` when it overflows.
    pub zaslavsky_product: Option<u128>,
}

/// Region counts per ReLU node, reconstructed from activation-pattern
/// prefixes, with the arrangement bound for each node.
pub fn count_report(net: &Network, pwa: &PwaFunction) -> Result<CountReport> {
    let widths = net.relu_widths();
    let neurons: usize = widths.iter().sum();
    if net.input_dim() != pwa.input_dim {
        return Err(Error::DomainMismatch("input dimensions differ".into()));
    }
    if let Some(r) = pwa.regions.iter().find(|r| r.pattern.len() != neurons) {
        return Err(Error::DomainMismatch(format!(
            "pattern length {} but network has {neurons} ReLU neurons",
            r.pattern.len()
        )));
    }
    let d = pwa.input_dim;
    let mut layers = Vec::with_capacity(widths.len());
    let mut product: Option<u128> = Some(1);
    let mut end = 0;
    let mut pass = true;
    for &w in &widths {
        let start = end;
        end += w;
        let mut children: BTreeMap<&[Sign], BTreeSet<&[Sign]>> = BTreeMap::new();
        for r in &pwa.regions {
            children.entry(&r.pattern.0[..start]).or_default().insert(&r.pattern.0[..end]);
        }
        let regions = children.values().map(BTreeSet::len).sum();
        let max_split = children.values().map(BTreeSet::len).max().unwrap_or(0);
        let bound = layer_bound(w, d)?;
        pass &= (max_split as u128) <= bound;
        product = product.and_then(|p| p.checked_mul(bound));
        layers.push(LayerCount { width: w, regions, max_split, bound });
    }
    let region_count = pwa.region_count();
    if let Some(p) = product {
        pass &= (region_count as u128) <= p;
    }
    Ok(CountReport {
        check: "count",
        pass,
        metric: region_count,
        region_count,
        per_layer_counts: layers,
        zaslavsky_product: product,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub check: &'static str,
    pub pass: bool,
    /// Number of regions whose stored pattern disagrees with the network.
    pub metric: usize,
}

/// Recomputes every region's activation pattern from the network's
/// pre-activations at the region's Chebyshev center.
pub fn check_patterns(net: &Network, pwa: &PwaFunction) -> Result<PatternReport> {
    let mismatches = pwa
        .regions
        .par_iter()
        .map(|r| {
            let c = r.region.chebyshev_center()?;
            let pre = net.pre_activations(&c.center)?;
            let signs: Vec<Sign> = pre.iter().flatten().map(|&z| Sign::of(z)).collect();
            Ok(usize::from(signs != r.pattern.0))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(PatternReport { check: "patterns", pass: mismatches == 0, metric: mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{random_network, DenseLayer, LayerNode};
    use crate::pwa::{box_domain, convert, ConvertOptions};
    use nalgebra::{DMatrix, DVector};

    fn identity_net(d: usize) -> Network {
        Network::new(d, vec![LayerNode::Dense(DenseLayer::new(DMatrix::identity(d, d), DVector::zeros(d)).unwrap())])
            .unwrap()
    }

    fn converted(seed: u64, hidden: &[usize]) -> (Network, PwaFunction) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 2, hidden, 2);
        let pwa = convert(&net, &box_domain(2, 3.0).unwrap(), &ConvertOptions::default()).unwrap();
        (net, pwa)
    }

    #[test]
    fn identity_is_exact() {
        let net = identity_net(2);
        let pwa = convert(&net, &box_domain(2, 1.0).unwrap(), &ConvertOptions::default()).unwrap();
        let rep = check_equivalence(&net, &pwa, 500, 1, 1e-9).unwrap();
        assert_eq!(rep.max_abs_diff(), 0.0);
        assert!(rep.pass);
        assert!(check_partition(&pwa, 500, 1, 1e-7).unwrap().pass);
        let cont = check_continuity(&pwa, 100, 1, 1e-8).unwrap();
        assert!(cont.pass && cont.pairs_checked == 0);
        assert_eq!(count_report(&net, &pwa).unwrap().region_count, 1);
    }

    #[test]
    fn converted_net_passes_all_checks() {
        let (net, pwa) = converted(21, &[5, 4]);
        assert!(check_equivalence(&net, &pwa, 2000, 2, 1e-9).unwrap().pass);
        assert!(check_partition(&pwa, 2000, 2, 1e-7).unwrap().pass);
        let cont = check_continuity(&pwa, 100, 2, 1e-8).unwrap();
        assert!(cont.pass, "{cont:?}");
        assert!(cont.pairs_checked > 10);
        let count = count_report(&net, &pwa).unwrap();
        assert!(count.pass);
        assert_eq!(count.per_layer_counts.last().unwrap().regions, pwa.region_count());
        assert!(check_patterns(&net, &pwa).unwrap().pass);
    }

    #[test]
    fn perturbed_matrix_fails_equivalence_in_that_region() {
        let (net, mut pwa) = converted(22, &[4]);
        let k = (0..pwa.region_count())
            .max_by(|&a, &b| {
                let ra = pwa.regions[a].region.chebyshev_center().unwrap().radius;
                let rb = pwa.regions[b].region.chebyshev_center().unwrap().radius;
                ra.total_cmp(&rb)
            })
            .unwrap();
        pwa.regions[k].matrix[(0, 0)] += 1e-3;
        let rep = check_equivalence(&net, &pwa, 5000, 3, 1e-9).unwrap();
        assert!(!rep.pass);
        assert_eq!(pwa.region_of(&rep.argmax_point, 0.0).unwrap(), k);
    }

    #[test]
    fn deleted_region_leaves_gap() {
        let (_, mut pwa) = converted(23, &[4]);
        let k = (0..pwa.region_count())
            .max_by(|&a, &b| {
                let ra = pwa.regions[a].region.chebyshev_center().unwrap().radius;
                let rb = pwa.regions[b].region.chebyshev_center().unwrap().radius;
                ra.total_cmp(&rb)
            })
            .unwrap();
        pwa.regions.remove(k);
        let rep = check_partition(&pwa, 5000, 4, 1e-7).unwrap();
        assert!(rep.uncovered > 0 && !rep.pass);
    }

    #[test]
    fn injected_bias_breaks_continuity() {
        let (_, mut pwa) = converted(24, &[4]);
        pwa.regions[0].matrix[(0, 2)] += 1e-3;
        let rep = check_continuity(&pwa, usize::MAX, 5, 1e-8).unwrap();
        assert!(!rep.pass);
        let (i, j) = rep.worst_pair.unwrap();
        assert!(i == 0 || j == 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let (net, pwa) = converted(25, &[3, 3]);
        assert_eq!(
            check_equivalence(&net, &pwa, 300, 9, 1e-9).unwrap(),
            check_equivalence(&net, &pwa, 300, 9, 1e-9).unwrap()
        );
        assert_eq!(check_continuity(&pwa, 20, 9, 1e-8).unwrap(), check_continuity(&pwa, 20, 9, 1e-8).unwrap());
    }

    #[test]
    fn mismatched_dimensions() {
        let (_, pwa) = converted(26, &[3]);
        assert!(matches!(check_equivalence(&identity_net(3), &pwa, 10, 0, 1e-9), Err(Error::DomainMismatch(_))));
        assert!(matches!(count_report(&identity_net(2), &pwa), Err(Error::DomainMismatch(_))));
    }
}
