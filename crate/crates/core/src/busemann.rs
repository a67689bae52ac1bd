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

//! Boundary rays and the Busemann fields they induce.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperbolicity::{gromov_product, tail_start};
use crate::space::{length_tol, FiniteMetricSpace, Vertex};

/// Minimum number of anchors a ray needs.
pub const MIN_ANCHORS: usize = 8;

/// A named anchor sequence `u_1, u_2, ...` standing in for a boundary point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryRay {
    pub name: String,
    pub anchors: Vec<Vertex>,
}

impl BoundaryRay {
    pub fn new(name: impl Into<String>, anchors: Vec<Vertex>) -> Self {
        Self { name: name.into(), anchors }
    }

    pub fn check_length(&self) -> Result<()> {
        if self.anchors.len() < MIN_ANCHORS {
            return Err(Error::RayTooShort { name: self.name.clone(), count: self.anchors.len(), min: MIN_ANCHORS });
        }
        Ok(())
    }

    pub fn last(&self) -> Vertex {
        *self.anchors.last().unwrap()
    }

    /// Anchors of the last quarter (at least two).
    pub fn tail(&self) -> &[Vertex] {
        &self.anchors[tail_start(self.anchors.len())..]
    }

    /// Anchors of the first quarter (at least two).
    pub fn head(&self) -> &[Vertex] {
        let n = self.anchors.len();
        &self.anchors[..(n / 4).max(2).min(n)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayDiagnostics {
    pub name: String,
    pub valid: bool,
    pub anchors: usize,
    /// Distances from the basepoint strictly increase along the ray.
    pub monotone: bool,
    /// Tail Gromov products all exceed the head ones.
    pub divergent: bool,
    /// Smallest `(u_i|u_j)_o` over distinct tail anchors.
    pub tail_floor: f64,
    /// Largest `(u_i|u_j)_o` over distinct head anchors.
    pub head_ceiling: f64,
    pub reason: Option<String>,
}

fn pair_products<'a>(space: &'a FiniteMetricSpace, anchors: &'a [Vertex], o: Vertex) -> impl Iterator<Item = f64> + 'a {
    anchors
        .iter()
        .enumerate()
        .flat_map(move |(i, &a)| anchors[i + 1..].iter().map(move |&b| gromov_product(space, a, b, o)))
}

/// Checks distance monotonicity and the divergence proxy of a ray.
pub fn validate_ray(space: &FiniteMetricSpace, ray: &BoundaryRay, o: Vertex) -> Result<RayDiagnostics> {
    ray.check_length()?;
    let d: Vec<f64> = ray.anchors.iter().map(|&u| space.dist(o, u)).collect();
    let decreasing = d.windows(2).position(|w| w[1] <= w[0]);
    let tail_floor = pair_products(space, ray.tail(), o).fold(f64::INFINITY, f64::min);
    let head_ceiling = pair_products(space, ray.head(), o).fold(f64::NEG_INFINITY, f64::max);
    let monotone = decreasing.is_none();
    let divergent = tail_floor > head_ceiling;
    let reason = if let Some(i) = decreasing {
        Some(format!(
            "distance from the basepoint does not increase from anchor {} to anchor {} ({} -> {})",
            i,
            i + 1,
            d[i],
            d[i + 1]
        ))
    } else if !divergent {
        Some(format!("tail Gromov products (floor {tail_floor}) do not exceed head products (ceiling {head_ceiling})"))
    } else {
        None
    };
    Ok(RayDiagnostics {
        name: ray.name.clone(),
        valid: monotone && divergent,
        anchors: ray.anchors.len(),
        monotone,
        divergent,
        tail_floor,
        head_ceiling,
        reason,
    })
}

/// `b(x) = |u_N - x| - |u_N - o|` for the final anchor `u_N` of a ray.
#[derive(Debug, Clone)]
pub struct BusemannField {
    pub b: Vec<f64>,
    pub omega: BoundaryRay,
    pub o: Vertex,
    /// `max_x |b(x) - b'(x)|` where `b'` uses the second-to-last anchor.
    pub anchor_error: f64,
}

fn field_from_anchor(space: &FiniteMetricSpace, u: Vertex, o: Vertex) -> Vec<f64> {
    let row = space.row(u);
    let base = row[o];
    row.iter().map(|d| d - base).collect()
}

pub fn busemann_field(space: &FiniteMetricSpace, ray: &BoundaryRay, o: Vertex) -> Result<BusemannField> {
    let diag = validate_ray(space, ray, o)?;
    if !diag.valid {
        return Err(Error::InvalidRay { name: ray.name.clone(), reason: diag.reason.unwrap_or_default() });
    }
    let n = ray.anchors.len();
    let b = field_from_anchor(space, ray.anchors[n - 1], o);
    let prev = field_from_anchor(space, ray.anchors[n - 2], o);
    let anchor_error = b.iter().zip(&prev).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
    Ok(BusemannField { b, omega: ray.clone(), o, anchor_error })
}

impl BusemannField {
    #[inline]
    pub fn value(&self, x: Vertex) -> f64 {
        self.b[x]
    }

    /// Largest change of `b` when the field is rebuilt from each of the last
    /// three anchors instead of the final one.
    pub fn anchor_spread(&self, space: &FiniteMetricSpace) -> f64 {
        let n = self.omega.anchors.len();
        self.omega.anchors[n - 3..]
            .iter()
            .map(|&u| {
                let alt = field_from_anchor(space, u, self.o);
                alt.iter().zip(&self.b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `(x|ω)_p` proxied by the minimum of `(x|u_i)_p` over the ray tail.
    pub fn omega_product(&self, space: &FiniteMetricSpace, x: Vertex, p: Vertex) -> f64 {
        self.omega.tail().iter().map(|&u| gromov_product(space, x, u, p)).fold(f64::INFINITY, f64::min)
    }

    /// Spread (max - min) of `(x|u_i)_p` over the ray tail. Small when the
    /// tail anchors are far enough out that `x` sees them as one point.
    pub fn omega_spread(&self, space: &FiniteMetricSpace, x: Vertex, p: Vertex) -> f64 {
        let (lo, hi) = self
            .omega
            .tail()
            .iter()
            .map(|&u| gromov_product(space, x, u, p))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)));
        hi - lo
    }

    /// Whether the tail resolves `(x|ω)_p` to within `delta`.
    pub fn resolves(&self, space: &FiniteMetricSpace, x: Vertex, p: Vertex, delta: f64) -> bool {
        self.omega_spread(space, x, p) <= delta + length_tol(space.dist(x, p))
    }
}

/// `(x|y)_b = (b(x) + b(y) - |x - y|) / 2`; may be negative.
pub fn gromov_product_b(space: &FiniteMetricSpace, field: &BusemannField, x: Vertex, y: Vertex) -> f64 {
    (field.b[x] + field.b[y] - space.dist(x, y)) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionOutcome {
    pub holds: bool,
    pub residual: f64,
    pub bound: f64,
}

/// Compares `(x|y)_b` with `(x|y)_o - (x|ω)_o - (ω|y)_o`; the residual may be
/// at most `10δ + anchor_error + tol_extra`.
pub fn product_decomposition(space: &FiniteMetricSpace, field: &BusemannField, x: Vertex, y: Vertex, delta: f64, tol_extra: f64) -> DecompositionOutcome {
    let o = field.o;
    let rhs = gromov_product(space, x, y, o) - field.omega_product(space, x, o) - field.omega_product(space, y, o);
    let residual = (gromov_product_b(space, field, x, y) - rhs).abs();
    let bound = 10.0 * delta + field.anchor_error + tol_extra;
    DecompositionOutcome { holds: residual <= bound + length_tol(bound), residual, bound }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackOutcome {
    pub holds: bool,
    /// Largest `ε|b(x) - b(y)| - ε(|x - y| + 10δ)`; non-positive passes.
    pub worst_margin: f64,
    pub worst_pair: (Vertex, Vertex),
    pub pairs_checked: usize,
}

/// `e^{-10εδ} e^{-ε|x-y|} <= ρ(x)/ρ(y) <= e^{10εδ} e^{ε|x-y|}` in log form
/// over the given pairs.
pub fn check_harnack(
    space: &FiniteMetricSpace,
    field: &BusemannField,
    epsilon: f64,
    delta: f64,
    pairs: &[(Vertex, Vertex)],
) -> HarnackOutcome {
    let margins: Vec<f64> = pairs
        .par_iter()
        .map(|&(x, y)| epsilon * (field.b[x] - field.b[y]).abs() - epsilon * (space.dist(x, y) + 10.0 * delta))
        .collect();
    let mut worst = (f64::NEG_INFINITY, (field.o, field.o));
    for (m, &p) in margins.iter().zip(pairs) {
        if *m > worst.0 {
            worst = (*m, p);
        }
    }
    if pairs.is_empty() {
        worst.0 = 0.0;
    }
    let tol = epsilon * length_tol(space.diameter());
    HarnackOutcome { holds: worst.0 <= tol, worst_margin: worst.0, worst_pair: worst.1, pairs_checked: pairs.len() }
}

/// Largest `|b(x) - b(y)| - |x - y|` over all pairs; the rough Lipschitz
/// constant beyond 1.
pub fn lipschitz_excess(space: &FiniteMetricSpace, field: &BusemannField) -> f64 {
    let n = space.len();
    (0..n)
        .into_par_iter()
        .map(|x| (0..n).map(|y| (field.b[x] - field.b[y]).abs() - space.dist(x, y)).fold(f64::NEG_INFINITY, f64::max))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}
