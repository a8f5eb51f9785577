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

//! Error type shared by all modules of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed linear program: {0}")]
    MalformedProblem(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("root region has an empty interior")]
    EmptyRoot,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("degenerate halfspace: normal vector is zero")]
    DegenerateHalfspace,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("layer {layer}: {message}")]
    DimensionChain { layer: usize, message: String },
    #[error("layer {layer}: non-finite weight or bias")]
    NonFiniteWeight { layer: usize },
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("domain has an empty interior")]
    EmptyDomain,
    #[error("row index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("point lies outside every region")]
    OutsideDomain,
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
