// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected: `{0}` cannot reach `{1}`")]
    Disconnected(String, String),
    #[error("edge ({u}, {v}) has non-positive or non-finite length {length}")]
    BadLength { u: String, v: String, length: f64 },
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertices `{0}` and `{1}` are not adjacent")]
    NotAdjacent(String, String),
    #[error("arc revisits vertex `{0}`")]
    NotSimple(String),
    #[error("vertex `{0}` does not lie on the arc")]
    NotOnArc(String),
    #[error("arclength {t} outside [0, {length}]")]
    ArclengthOutOfRange { t: f64, length: f64 },
    #[error("inconsistent triangle: {0}")]
    InconsistentTriangle(String),
    #[error("ray `{name}` has {count} anchors, at least {min} required")]
    RayTooShort { name: String, count: usize, min: usize },
    #[error("ray `{name}` is not a valid Gromov sequence: {reason}")]
    InvalidRay { name: String, reason: String },
    #[error("boundary proxy set is empty")]
    EmptyProxy,
    #[error("h = {0} must satisfy 0 <= h < 1/13")]
    HOutOfRange(f64),
    #[error("epsilon = {0} must be positive and finite")]
    BadEpsilon(f64),
    #[error("constants ledger undefined: {0}")]
    LedgerUndefined(String),
    #[error("no admissible epsilon in (0, 1]: {0}")]
    BisectionFailed(String),
    #[error("{{{p},{q}}} is not a hyperbolic tiling (need 1/p + 1/q < 1/2)")]
    NotHyperbolic { p: usize, q: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
