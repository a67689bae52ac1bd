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

//! Hyperbolic graphs, Busemann fields and their conformal uniformization.
//!
//! A connected weighted graph with its path metric stands in for an
//! intrinsic Gromov hyperbolic space. Boundary points are modeled by
//! designated rays of anchor vertices. From a ray and a basepoint we build a
//! Busemann field `b`, deform edge lengths by the density `e^{-εb}` and check
//! the quantitative inequalities that make the deformed space uniform.

pub mod busemann;
pub mod error;
pub mod generate;
pub mod hyperbolicity;
pub mod io;
pub mod sampling;
pub mod space;
pub mod uniformize;
pub mod verify;

pub use busemann::{BoundaryRay, BusemannField};
pub use error::{Error, Result};
pub use hyperbolicity::{HyperbolicityEstimate, Method};
pub use io::SpaceDocument;
pub use space::{build_space, FiniteMetricSpace, PathArc, Vertex};
pub use uniformize::{ConformalDeformation, ConstantsLedger};
pub use verify::{CheckResult, Verdict, VerificationReport, VerifyConfig};
