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

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relu_dissect::network::{random_dense, random_network, LayerDoc, LayerNode, Network};
use relu_dissect::DenseLayer;

/// Plain-loop evaluation straight from the serialized document.
fn reference_forward(net: &Network, x: &[f64]) -> Vec<f64> {
    let doc = net.to_doc();
    let mut v = x.to_vec();
    for layer in &doc.layers {
        match layer {
            LayerDoc::Dense { weights, bias } => {
                v = weights
                    .iter()
                    .zip(bias)
                    .map(|(row, b)| row.iter().zip(&v).map(|(w, a)| w * a).sum::<f64>() + b)
                    .collect();
            }
            LayerDoc::Relu => v.iter_mut().for_each(|a| *a = a.max(0.0)),
        }
    }
    v
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-10.0..10.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_matches_reference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 2, &[16, 16], 2);
        for _ in 0..20 {
            let x = random_point(&mut rng, 2);
            let a = net.forward(&x).unwrap();
            let b = reference_forward(&net, &x);
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()));
            }
        }
    }

    #[test]
    fn dense_only_network_is_the_matrix_product(seed in any::<u64>(), d in 1usize..5, depth in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut dims = vec![d];
        for _ in 0..depth {
            dims.push(rng.random_range(1..6));
        }
        let mut product = nalgebra::DMatrix::<f64>::identity(d + 1, d + 1);
        for w in dims.windows(2) {
            let layer = random_dense(&mut rng, w[0], w[1]);
            product = layer.homogeneous() * product;
            layers.push(LayerNode::Dense(layer));
        }
        let net = Network::new(d, layers).unwrap();
        let x = random_point(&mut rng, d);
        let y = net.forward(&x).unwrap();
        let mut xh = x.clone();
        xh.push(1.0);
        let yh = &product * nalgebra::DVector::from_vec(xh);
        for (i, v) in y.iter().enumerate() {
            prop_assert!((v - yh[i]).abs() <= 1e-9 * (1.0 + v.abs()));
        }
        prop_assert!((yh[y.len()] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inserting_an_identity_layer_changes_nothing(seed in any::<u64>(), pos in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 3, &[5, 4], 2);
        let mut layers = net.layers().to_vec();
        let pos = pos.min(layers.len());
        let width = if pos == 0 {
            net.input_dim()
        } else {
            match &layers[..pos].iter().rev().find_map(|l| match l {
                LayerNode::Dense(dl) => Some(dl.out_dim()),
                LayerNode::Relu => None,
            }) {
                Some(w) => *w,
                None => net.input_dim(),
            }
        };
        let identity = DenseLayer::new(
            nalgebra::DMatrix::identity(width, width),
            nalgebra::DVector::zeros(width),
        )
        .unwrap();
        layers.insert(pos, LayerNode::Dense(identity));
        let augmented = Network::new(net.input_dim(), layers).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut rng, 3);
            prop_assert_eq!(net.forward(&x).unwrap(), augmented.forward(&x).unwrap());
        }
    }

    #[test]
    fn forward_is_continuous_along_segments(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 2, &[8, 8], 1);
        let a = random_point(&mut rng, 2);
        let b = random_point(&mut rng, 2);
        let max_jump = |n: usize| {
            let ys: Vec<f64> = (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + t * (q - p)).collect();
                    net.forward(&x).unwrap()[0]
                })
                .collect();
            ys.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
        };
        let coarse = max_jump(1000);
        let fine = max_jump(2000);
        prop_assert!(fine <= 0.6 * coarse + 1e-12, "jump {} at 2n vs {} at n", fine, coarse);
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 3, &[4, 3], 2);
        let back = Network::from_json_str(&net.to_json_string()).unwrap();
        prop_assert_eq!(net, back);
    }
}
