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

//! Deterministic test spaces: paths, trees, hyperbolic tilings, grids and
//! jittered subdivisions of any of them.

mod tessellation;

use std::f64::consts::PI;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use tessellation::{tessellation, Tiling};

use crate::busemann::MIN_ANCHORS;
use crate::error::{Error, Result};
use crate::io::SpaceDocument;
use crate::space::{shortest_arc, FiniteMetricSpace};

/// Number of radial spokes designated on a tiling.
pub const SPOKES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// Vertices `-n..=n`, unit edges, basepoint `0`, rays `pos` and `neg`.
    Path { n: usize },
    /// Complete `b`-ary tree of the given depth, basepoint `root`.
    BaryTree { b: usize, depth: usize },
    /// Vertex/edge graph of a `{p,q}` tiling truncated after `layers`.
    TessellationDisk { p: usize, q: usize, layers: usize },
    /// `width x height` grid, basepoint at a corner.
    Grid { width: usize, height: usize },
    /// Every edge of `base` split into `subdivide` pieces whose lengths are
    /// scaled by independent factors in `[1 - amplitude, 1 + amplitude]`.
    Jittered { base: Box<GeneratorSpec>, subdivide: usize, amplitude: f64, seed: u64 },
}

pub fn generate(spec: &GeneratorSpec) -> Result<SpaceDocument> {
    match spec {
        GeneratorSpec::Path { n } => path(*n),
        GeneratorSpec::BaryTree { b, depth } => bary_tree(*b, *depth),
        GeneratorSpec::TessellationDisk { p, q, layers } => tessellation_disk(*p, *q, *layers),
        GeneratorSpec::Grid { width, height } => grid(*width, *height),
        GeneratorSpec::Jittered { base, subdivide, amplitude, seed } => {
            jittered(&generate(base)?, *subdivide, *amplitude, *seed)
        }
    }
}

fn keep_long_rays(rays: Vec<(String, Vec<String>)>) -> IndexMap<String, Vec<String>> {
    rays.into_iter().filter(|(_, a)| a.len() >= MIN_ANCHORS).collect()
}

pub fn path(n: usize) -> Result<SpaceDocument> {
    if n == 0 {
        return Err(Error::InvalidGenerator("path needs n >= 1".into()));
    }
    let n = n as i64;
    let vertices: Vec<String> = (-n..=n).map(|i| i.to_string()).collect();
    let edges = (-n..n).map(|i| (i.to_string(), (i + 1).to_string(), 1.0)).collect();
    let rays = keep_long_rays(vec![
        ("pos".into(), (1..=n).map(|i| i.to_string()).collect()),
        ("neg".into(), (1..=n).map(|i| (-i).to_string()).collect()),
    ]);
    Ok(SpaceDocument { vertices, edges, basepoint: "0".into(), rays })
}

fn tree_child(parent: &str, k: usize) -> String {
    if parent == "root" {
        k.to_string()
    } else {
        format!("{parent}.{k}")
    }
}

pub fn bary_tree(b: usize, depth: usize) -> Result<SpaceDocument> {
    if b < 2 || depth == 0 {
        return Err(Error::InvalidGenerator("bary_tree needs b >= 2 and depth >= 1".into()));
    }
    let mut vertices = vec!["root".to_string()];
    let mut edges = Vec::new();
    let mut level = vec!["root".to_string()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * b);
        for parent in &level {
            for k in 0..b {
                let child = tree_child(parent, k);
                edges.push((parent.clone(), child.clone(), 1.0));
                next.push(child);
            }
        }
        vertices.extend(next.iter().cloned());
        level = next;
    }
    let spine = |first: usize, rest: usize| {
        let mut out = vec![first.to_string()];
        while out.len() < depth {
            let next = tree_child(out.last().unwrap(), rest);
            out.push(next);
        }
        out
    };
    let rays = keep_long_rays(vec![
        ("spineL".into(), spine(0, 0)),
        ("spineR".into(), spine(b - 1, b - 1)),
        ("spineRL".into(), spine(b - 1, 0)),
    ]);
    Ok(SpaceDocument { vertices, edges, basepoint: "root".into(), rays })
}

pub fn tessellation_disk(p: usize, q: usize, layers: usize) -> Result<SpaceDocument> {
    let tiling = tessellation(p, q, layers)?;
    let vertices: Vec<String> = (0..tiling.positions.len()).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String, f64)> =
        tiling.edges.iter().map(|&(u, v)| (vertices[u].clone(), vertices[v].clone(), 1.0)).collect();
    let space = FiniteMetricSpace::new(vertices.clone(), &edges)?;
    let o = 0;
    let mut rays = Vec::new();
    for k in 0..SPOKES {
        let lo = 2.0 * PI * k as f64 / SPOKES as f64;
        let hi = 2.0 * PI * (k + 1) as f64 / SPOKES as f64;
        let far = (0..space.len())
            .filter(|&v| {
                let angle = tiling.positions[v].arg().rem_euclid(2.0 * PI);
                v != o && angle >= lo && angle < hi
            })
            .fold(None, |best: Option<usize>, v| match best {
                Some(b) if space.dist(o, b) >= space.dist(o, v) => Some(b),
                _ => Some(v),
            });
        if let Some(far) = far {
            let arc = shortest_arc(&space, o, far);
            rays.push((format!("spoke{k}"), arc.vertices()[1..].iter().map(|&v| vertices[v].clone()).collect()));
        }
    }
    Ok(SpaceDocument { vertices, edges, basepoint: "v0".into(), rays: keep_long_rays(rays) })
}

pub fn grid(width: usize, height: usize) -> Result<SpaceDocument> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidGenerator("grid needs width, height >= 2".into()));
    }
    let id = |i: usize, j: usize| format!("{i}_{j}");
    let mut vertices = Vec::with_capacity(width * height);
    let mut edges = Vec::new();
    for j in 0..height {
        for i in 0..width {
            vertices.push(id(i, j));
            if i + 1 < width {
                edges.push((id(i, j), id(i + 1, j), 1.0));
            }
            if j + 1 < height {
                edges.push((id(i, j), id(i, j + 1), 1.0));
            }
        }
    }
    let rays = keep_long_rays(vec![
        ("east".into(), (1..width).map(|i| id(i, 0)).collect()),
        ("north".into(), (1..height).map(|j| id(0, j)).collect()),
    ]);
    Ok(SpaceDocument { vertices, edges, basepoint: id(0, 0), rays })
}

/// Subdivides every edge of `base` into `subdivide` pieces and scales each
/// piece by an independent factor in `[1 - amplitude, 1 + amplitude]`.
/// Basepoint and ray anchors are the original vertices.
pub fn jittered(base: &SpaceDocument, subdivide: usize, amplitude: f64, seed: u64) -> Result<SpaceDocument> {
    if subdivide == 0 {
        return Err(Error::InvalidGenerator("subdivision count must be at least 1".into()));
    }
    let min_piece = base.edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min) / subdivide as f64;
    if !(amplitude >= 0.0 && amplitude < min_piece / 4.0) {
        return Err(Error::InvalidGenerator(format!(
            "jitter amplitude {amplitude} must be non-negative and below a quarter of the smallest edge ({min_piece})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = base.vertices.clone();
    let mut edges = Vec::with_capacity(base.edges.len() * subdivide);
    for (u, v, len) in &base.edges {
        let mut prev = u.clone();
        for k in 1..=subdivide {
            let next = if k == subdivide {
                v.clone()
            } else {
                let mid = format!("{u}~{v}#{k}");
                vertices.push(mid.clone());
                mid
            };
            let factor = 1.0 + amplitude * rng.gen_range(-1.0..=1.0);
            edges.push((prev, next.clone(), len / subdivide as f64 * factor));
            prev = next;
        }
    }
    Ok(SpaceDocument { vertices, edges, basepoint: base.basepoint.clone(), rays: base.rays.clone() })
}
