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

//! Exact piecewise-affine representations of fully connected ReLU networks.
//!
//! A network built from dense layers and ReLU activations computes an
//! affine map on each cell of a polyhedral partition of its input space.
//! [`pwa::convert`] computes that partition explicitly: every cell is
//! returned as an H-representation together with its homogeneous affine
//! matrix and the activation pattern of all ReLU neurons.

pub mod arrangement;
pub mod cli;
pub mod error;
pub mod lp;
pub mod network;
pub mod polyhedra;
pub mod pwa;
pub mod verify;

pub use arrangement::{get_regions, zaslavsky_bound, ArrangementResult, Cell, RegionTree, Sign};
pub use error::{Error, Result};
pub use lp::{feasible, solve_lp, LpOutcome, LpProblem, LpStatus};
pub use network::{DenseLayer, LayerNode, Network};
pub use polyhedra::{Chebyshev, HPolyhedron, Halfspace};
pub use pwa::{convert, ActivationPattern, ConvertOptions, LinearRegion, PwaFunction};
