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

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relu_dissect::network::{random_dense, random_network, LayerNode, Network};
use relu_dissect::pwa::{box_domain, convert, convert_traced, layer_bound, neuron_hyperplanes, ConvertOptions};
use relu_dissect::verify::{check_continuity, check_equivalence, check_partition, check_patterns};
use relu_dissect::{PwaFunction, Sign};

fn small_net(seed: u64, d: usize, hidden: &[usize]) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network(&mut rng, d, hidden, 2)
}

fn hidden_widths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=5, 1..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conversion_is_exact(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let pwa = convert(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let rep = check_equivalence(&net, &pwa, 500, seed, 1e-9).unwrap();
        prop_assert!(rep.pass, "max diff {}", rep.metric);
    }

    #[test]
    fn regions_partition_and_join_continuously(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let pwa = convert(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let part = check_partition(&pwa, 500, seed, 1e-7).unwrap();
        prop_assert!(part.pass, "{:?}", part);
        let cont = check_continuity(&pwa, 30, seed, 1e-8).unwrap();
        prop_assert!(cont.pass, "{:?}", cont);
    }

    #[test]
    fn stored_patterns_match_the_network(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let pwa = convert(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let rep = check_patterns(&net, &pwa).unwrap();
        prop_assert!(rep.pass, "{} mismatches", rep.metric);
        let total: usize = net.relu_widths().iter().sum();
        for r in &pwa.regions {
            prop_assert_eq!(r.pattern.len(), total);
        }
    }

    #[test]
    fn layer_counts_grow_and_respect_bounds(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let (pwa, trace) = convert_traced(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let mut prev = 1usize;
        for t in &trace {
            prop_assert!(t.regions_after >= prev);
            prop_assert!(t.max_split as u128 <= layer_bound(t.width, d).unwrap());
            prev = t.regions_after;
        }
        prop_assert_eq!(prev, pwa.region_count());
    }

    #[test]
    fn worker_count_does_not_change_the_output(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let dom = box_domain(d, 10.0).unwrap();
        let one = ConvertOptions { workers: Some(1), ..Default::default() };
        let four = ConvertOptions { workers: Some(4), ..Default::default() };
        let a = convert(&net, &dom, &one).unwrap().to_json_string();
        let b = convert(&net, &dom, &four).unwrap().to_json_string();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn region_of_contains_the_point(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let pwa = convert(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
            let i = pwa.region_of(&x, 1e-7).unwrap();
            prop_assert!(pwa.regions[i].region.contains(&x, 1e-7).unwrap());
            prop_assert_eq!(pwa.eval(&x, 1e-7).unwrap(), pwa.regions[i].apply(&x));
        }
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), d in 1usize..=3, hidden in hidden_widths()) {
        let net = small_net(seed, d, &hidden);
        let pwa = convert(&net, &box_domain(d, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        let text = pwa.to_json_string();
        let back = PwaFunction::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &pwa);
        prop_assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn boundary_points_give_agreeing_values(seed in any::<u64>(), hidden in hidden_widths()) {
        let net = small_net(seed, 2, &hidden);
        let pwa = convert(&net, &box_domain(2, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
        for (i, r) in pwa.regions.iter().enumerate() {
            for h in r.region.rows() {
                let Ok(ball) = r.region.chebyshev_center_on(h) else { continue };
                if ball.radius < 1e-6 {
                    continue;
                }
                let x = ball.center;
                let Ok(k) = pwa.region_of(&x, 1e-7) else { continue };
                let got = pwa.eval(&x, 1e-7).unwrap();
                prop_assert_eq!(&got, &pwa.regions[k].apply(&x));
                let own = r.apply(&x);
                for (a, b) in got.iter().zip(&own) {
                    prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "region {} vs {}: {} {}", i, k, a, b);
                }
            }
        }
    }
}

#[test]
fn dense_only_network_is_one_affine_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_dense(&mut rng, 3, 4);
    let b = random_dense(&mut rng, 4, 2);
    let product = b.homogeneous() * a.homogeneous();
    let net = Network::new(3, vec![LayerNode::Dense(a), LayerNode::Dense(b)]).unwrap();
    let pwa = convert(&net, &box_domain(3, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
    assert_eq!(pwa.region_count(), 1);
    assert!(pwa.regions[0].pattern.is_empty());
    assert!((&pwa.regions[0].matrix - &product).amax() <= 1e-12);
}

#[test]
fn neuron_boundaries_sit_where_preactivations_cross_zero() {
    let net = small_net(17, 2, &[4, 3]);
    // Convert the prefix that ends just before the second ReLU: its region
    // maps are exactly the matrices fed into that node.
    let prefix = Network::new(2, net.layers()[..3].to_vec()).unwrap();
    let pwa = convert(&prefix, &box_domain(2, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut crossings = 0;
    for r in &pwa.regions {
        let ball = r.region.chebyshev_center().unwrap();
        let bounds = neuron_hyperplanes(&r.matrix, 3, 1e-12);
        for _ in 0..10 {
            let pick = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let rad = 0.99 * ball.radius * rng.random_range(0.0f64..1.0).sqrt();
                vec![ball.center[0] + rad * ang.cos(), ball.center[1] + rad * ang.sin()]
            };
            let a = pick(&mut rng);
            let b = pick(&mut rng);
            let at = |t: f64| -> Vec<f64> { a.iter().zip(&b).map(|(p, q)| p + t * (q - p)).collect() };
            let pre = |t: f64, k: usize| net.pre_activations(&at(t)).unwrap()[1][k];
            for &(k, ref h) in &bounds.hyperplanes {
                let (fa, fb) = (pre(0.0, k), pre(1.0, k));
                if fa.signum() == fb.signum() {
                    continue;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if pre(mid, k).signum() == fa.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                let (ha, hb) = (h.eval(&a), h.eval(&b));
                let analytic = ha / (ha - hb);
                let len = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
                assert!((root - analytic).abs() * len < 1e-7, "neuron {k}: {root} vs {analytic}");
                crossings += 1;
            }
        }
    }
    assert!(crossings > 0);
}

#[test]
fn single_layer_maps_are_the_zeroed_layer_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let layer = random_dense(&mut rng, 2, 3);
    let t = layer.homogeneous();
    let net = Network::new(2, vec![LayerNode::Dense(layer), LayerNode::Relu]).unwrap();
    let pwa = convert(&net, &box_domain(2, 100.0).unwrap(), &ConvertOptions::default()).unwrap();
    assert_eq!(pwa.region_count(), 7);
    for r in &pwa.regions {
        let mut expect: DMatrix<f64> = t.clone();
        for (i, s) in r.pattern.0.iter().enumerate() {
            if *s == Sign::Negative {
                expect.row_mut(i).fill(0.0);
            }
        }
        assert_eq!(r.matrix, expect);
        let x = r.region.chebyshev_center().unwrap().center;
        let y = net.forward(&x).unwrap();
        let xh = DVector::from_vec(vec![x[0], x[1], 1.0]);
        let yh = &r.matrix * xh;
        for i in 0..3 {
            assert!((y[i] - yh[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn every_sampled_pattern_is_a_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let net = random_network(&mut rng, 2, &[15, 5], 1);
    let pwa = convert(&net, &box_domain(2, 10.0).unwrap(), &ConvertOptions::default()).unwrap();
    let known: std::collections::HashSet<String> = pwa.regions.iter().map(|r| r.pattern.to_string()).collect();
    assert_eq!(known.len(), pwa.region_count());
    let bound: u128 = net.relu_widths().iter().map(|&w| layer_bound(w, 2).unwrap()).product();
    assert!(pwa.region_count() as u128 <= bound);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..1_000_000 {
        let x = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let pattern: String =
            net.pre_activations(&x).unwrap().iter().flatten().map(|&v| Sign::of(v).as_char()).collect();
        seen.insert(pattern);
    }
    let missing: Vec<&String> = seen.iter().filter(|p| !known.contains(*p)).collect();
    assert!(missing.is_empty(), "{} sampled patterns without a region", missing.len());
}
