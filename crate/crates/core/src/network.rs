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

//! Feedforward networks as sequences of dense and ReLU nodes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Affine layer `z = W·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: DMatrix<f64>,
    bias: DVector<f64>,
}

impl DenseLayer {
    pub fn new(weights: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        check_dim(weights.nrows(), bias.len())?;
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::EmptyInput("dense layer"));
        }
        if !weights.iter().chain(bias.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(DenseLayer { weights, bias })
    }

    /// From row-major `out × in` weights.
    pub fn from_rows(weights: &[Vec<f64>], bias: &[f64]) -> Result<Self> {
        let rows = weights.len();
        let cols = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|r| r.len() != cols) {
            return Err(Error::Schema("weight rows have different lengths".into()));
        }
        let w = DMatrix::from_row_iterator(rows, cols, weights.iter().flatten().copied());
        DenseLayer::new(w, DVector::from_column_slice(bias))
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    /// `[[W, b], [0, 1]]`, acting on homogeneous coordinates `[x; 1]`.
    pub fn homogeneous(&self) -> DMatrix<f64> {
        let (m, n) = self.weights.shape();
        let mut t = DMatrix::zeros(m + 1, n + 1);
        t.view_mut((0, 0), (m, n)).copy_from(&self.weights);
        t.view_mut((0, n), (m, 1)).copy_from(&self.bias);
        t[(m, n)] = 1.0;
        t
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.weights * x + &self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerNode {
    Dense(DenseLayer),
    Relu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    layers: Vec<LayerNode>,
}

impl Network {
    pub fn new(input_dim: usize, layers: Vec<LayerNode>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Schema("input_dim must be positive".into()));
        }
        if layers.is_empty() {
            return Err(Error::Schema("network has no layers".into()));
        }
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if let LayerNode::Dense(d) = layer {
                if d.in_dim() != width {
                    return Err(Error::DimensionChain {
                        layer: i,
                        message: format!("expects {} inputs but receives {}", d.in_dim(), width),
                    });
                }
                width = d.out_dim();
            }
        }
        Ok(Network { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.iter().fold(self.input_dim, |w, l| match l {
            LayerNode::Dense(d) => d.out_dim(),
            LayerNode::Relu => w,
        })
    }

    pub fn layers(&self) -> &[LayerNode] {
        &self.layers
    }

    /// Width of the signal entering each ReLU node, in network order.
    pub fn relu_widths(&self) -> Vec<usize> {
        let mut width = self.input_dim;
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                LayerNode::Dense(d) => width = d.out_dim(),
                LayerNode::Relu => out.push(width),
            }
        }
        out
    }

    pub fn relu_neuron_count(&self) -> usize {
        self.relu_widths().iter().sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<DVector<f64>> {
        check_dim(self.input_dim, x.len())?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(DVector::from_column_slice(x))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.check_input(x)?;
        for l in &self.layers {
            match l {
                LayerNode::Dense(d) => v = d.apply(&v),
                LayerNode::Relu => v.apply(|z| *z = z.max(0.0)),
            }
        }
        Ok(v.as_slice().to_vec())
    }

    /// The signal entering each ReLU node when evaluating `x`.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut v = self.check_input(x)?;
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                LayerNode::Dense(d) => v = d.apply(&v),
                LayerNode::Relu => {
                    out.push(v.as_slice().to_vec());
                    v.apply(|z| *z = z.max(0.0));
                }
            }
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        doc.try_into()
    }

    pub fn to_doc(&self) -> NetworkDoc {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                LayerNode::Dense(d) => LayerDoc::Dense {
                    weights: d.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    bias: d.bias.iter().copied().collect(),
                },
                LayerNode::Relu => LayerDoc::Relu,
            })
            .collect();
        NetworkDoc { input_dim: self.input_dim, layers }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("network serializes")
    }
}

/// On-disk network document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub input_dim: usize,
    pub layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum LayerDoc {
    Dense { weights: Vec<Vec<f64>>, bias: Vec<f64> },
    Relu,
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Network> {
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (i, l) in doc.layers.into_iter().enumerate() {
            layers.push(match l {
                LayerDoc::Relu => LayerNode::Relu,
                LayerDoc::Dense { weights, bias } => {
                    if !weights.iter().flatten().chain(&bias).all(|v| v.is_finite()) {
                        return Err(Error::NonFiniteWeight { layer: i });
                    }
                    let chain = |message: String| Error::DimensionChain { layer: i, message };
                    if weights.is_empty() || weights[0].is_empty() {
                        return Err(chain("empty weight matrix".into()));
                    }
                    if weights.len() != bias.len() {
                        return Err(chain(format!("{} weight rows but bias of length {}", weights.len(), bias.len())));
                    }
                    if weights.iter().any(|r| r.len() != weights[0].len()) {
                        return Err(chain("weight rows have different lengths".into()));
                    }
                    LayerNode::Dense(DenseLayer::from_rows(&weights, &bias)?)
                }
            });
        }
        Network::new(doc.input_dim, layers)
    }
}

/// Dense layer with i.i.d. standard normal weights and uniform(-1, 1) biases.
pub fn random_dense<R: Rng + ?Sized>(rng: &mut R, in_dim: usize, out_dim: usize) -> DenseLayer {
    let w = DMatrix::from_fn(out_dim, in_dim, |_, _| StandardNormal.sample(rng));
    let unif = Uniform::new(-1.0, 1.0).expect("valid range");
    let b = DVector::from_fn(out_dim, |_, _| unif.sample(rng));
    DenseLayer::new(w, b).expect("finite random layer")
}

/// `input_dim → hidden[0] → … → output_dim` with a ReLU after every hidden
/// layer and none on the output.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, input_dim: usize, hidden: &[usize], output_dim: usize) -> Network {
    let mut layers = Vec::with_capacity(2 * hidden.len() + 1);
    let mut width = input_dim;
    for &h in hidden {
        layers.push(LayerNode::Dense(random_dense(rng, width, h)));
        layers.push(LayerNode::Relu);
        width = h;
    }
    layers.push(LayerNode::Dense(random_dense(rng, width, output_dim)));
    Network::new(input_dim, layers).expect("consistent random network")
}
