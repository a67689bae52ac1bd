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

//! Truncated `{p,q}` tilings of the hyperbolic plane, built in the Poincaré
//! disk by repeated half-turns about edge midpoints.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SAME_POINT: f64 = 1e-7;

/// Vertex positions (Poincaré disk) and unit edges of a truncated tiling.
#[derive(Debug, Clone)]
pub struct Tiling {
    pub positions: Vec<Complex64>,
    /// Index pairs `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Number of tiles per layer.
    pub layer_tiles: Vec<usize>,
}

/// Pseudo-hyperbolic distance `|z - w| / |1 - conj(w) z|`.
fn pseudo_dist(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm() / (Complex64::new(1.0, 0.0) - w.conj() * z).norm()
}

/// Möbius map sending `m` to the origin.
fn to_origin(m: Complex64, z: Complex64) -> Complex64 {
    (z - m) / (Complex64::new(1.0, 0.0) - m.conj() * z)
}

fn from_origin(m: Complex64, w: Complex64) -> Complex64 {
    (w + m) / (Complex64::new(1.0, 0.0) + m.conj() * w)
}

/// Rotation by π about `m`.
fn half_turn(m: Complex64, z: Complex64) -> Complex64 {
    from_origin(m, -to_origin(m, z))
}

/// Hyperbolic midpoint of the segment from `a` to `b`.
fn midpoint(a: Complex64, b: Complex64) -> Complex64 {
    let w = to_origin(a, b);
    let rho = w.norm();
    let half = (rho.atanh() / 2.0).tanh();
    from_origin(a, w * (half / rho))
}

struct Tile {
    center: Complex64,
    corners: Vec<Complex64>,
}

fn find(points: &[Complex64], z: Complex64) -> Option<usize> {
    points.iter().position(|&w| pseudo_dist(z, w) < SAME_POINT)
}

/// Tiles of layer 1 are the central tile; layer `k+1` adds every tile sharing
/// a vertex with layers `1..=k`.
pub fn tessellation(p: usize, q: usize, layers: usize) -> Result<Tiling> {
    if p < 3 || q < 3 || 2 * (p + q) >= p * q {
        return Err(Error::NotHyperbolic { p, q });
    }
    if layers == 0 {
        return Err(Error::InvalidGenerator("tessellation needs at least one layer".into()));
    }
    let (pf, qf) = (p as f64, q as f64);
    let circumradius = ((PI / pf).tan().recip() * (PI / qf).tan().recip()).acosh();
    let r0 = (circumradius / 2.0).tanh();
    let corners: Vec<Complex64> = (0..p).map(|k| Complex64::from_polar(r0, 2.0 * PI * k as f64 / pf)).collect();
    let mut tiles = vec![Tile { center: Complex64::new(0.0, 0.0), corners }];
    let mut positions: Vec<Complex64> = tiles[0].corners.clone();
    let mut tile_vertices: Vec<Vec<usize>> = vec![(0..p).collect()];
    let mut layer_tiles = vec![1];

    for _ in 1..layers {
        let patch_vertices = positions.len();
        let layer_start = tiles.len();
        let mut queue: Vec<usize> = (0..tiles.len()).collect();
        while let Some(t) = queue.pop() {
            for k in 0..p {
                let (a, b) = (tiles[t].corners[k], tiles[t].corners[(k + 1) % p]);
                let m = midpoint(a, b);
                let center = half_turn(m, tiles[t].center);
                if tiles.iter().any(|s| pseudo_dist(s.center, center) < SAME_POINT) {
                    continue;
                }
                let corners: Vec<Complex64> = tiles[t].corners.iter().map(|&z| half_turn(m, z)).collect();
                let touches_patch = corners.iter().any(|&z| find(&positions[..patch_vertices], z).is_some());
                if !touches_patch {
                    continue;
                }
                let mut ids = Vec::with_capacity(p);
                for &z in &corners {
                    let id = match find(&positions, z) {
                        Some(i) => i,
                        None => {
                            positions.push(z);
                            positions.len() - 1
                        }
                    };
                    ids.push(id);
                }
                tile_vertices.push(ids);
                tiles.push(Tile { center, corners });
                queue.push(tiles.len() - 1);
            }
        }
        layer_tiles.push(tiles.len() - layer_start);
    }

    let mut edges: Vec<(usize, usize)> = tile_vertices
        .iter()
        .flat_map(|ids| (0..p).map(move |k| (ids[k].min(ids[(k + 1) % p]), ids[k].max(ids[(k + 1) % p]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(Tiling { positions, edges, layer_tiles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_euclidean_and_spherical() {
        assert!(matches!(tessellation(4, 4, 2), Err(Error::NotHyperbolic { .. })));
        assert!(matches!(tessellation(6, 3, 2), Err(Error::NotHyperbolic { .. })));
        assert!(matches!(tessellation(5, 3, 2), Err(Error::NotHyperbolic { .. })));
        assert!(tessellation(7, 3, 1).is_ok());
    }

    #[test]
    fn half_turn_is_an_involution() {
        let m = Complex64::new(0.3, -0.2);
        let z = Complex64::new(-0.5, 0.4);
        assert!(pseudo_dist(half_turn(m, half_turn(m, z)), z) < 1e-12);
        let mid = midpoint(z, m);
        assert!((pseudo_dist(mid, z) - pseudo_dist(mid, m)).abs() < 1e-12);
    }

    #[test]
    fn every_vertex_has_degree_at_most_q() {
        let t = tessellation(7, 3, 3).unwrap();
        let mut deg = vec![0; t.positions.len()];
        for &(u, v) in &t.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(deg.iter().all(|&d| (2..=3).contains(&d)));
        assert!(t.positions.iter().all(|z| z.norm() < 1.0));
    }
}
