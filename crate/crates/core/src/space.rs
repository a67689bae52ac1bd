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

//! Finite metric spaces: weighted graphs with their path metric, arcs
//! (simple edge paths with arclength bookkeeping) and h-short arc search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Index of a vertex inside a [`FiniteMetricSpace`].
pub type Vertex = usize;

/// Default cap on the number of arcs returned by [`h_short_arcs`].
pub const DEFAULT_MAX_ARCS: usize = 64;

/// Node expansions allowed per simple-path search before it gives up.
pub const DEFAULT_EXPANSION_BUDGET: usize = 2_000_000;

/// Metric axioms are checked on every triple up to this many vertices.
pub const METRIC_CHECK_EXHAUSTIVE: usize = 200;

const METRIC_TOL: f64 = 1e-12;

/// Relative tolerance used when comparing sums of edge lengths that are
/// equal in exact arithmetic.
pub(crate) fn length_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub length: f64,
}

/// A connected weighted graph together with its all-pairs path metric.
///
/// Immutable once built. Edges are stored canonically (`u < v`, sorted), so
/// the distance matrix does not depend on the order edges were supplied in.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    index: HashMap<String, Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(Vertex, f64)>>,
    dist: Vec<f64>,
}

/// Builds a space from an edge list. Vertices are ordered by id.
pub fn build_space<S: AsRef<str>>(edge_list: &[(S, S, f64)]) -> Result<FiniteMetricSpace> {
    let mut ids: Vec<String> = edge_list
        .iter()
        .flat_map(|(u, v, _)| [u.as_ref().to_string(), v.as_ref().to_string()])
        .collect();
    ids.sort();
    ids.dedup();
    FiniteMetricSpace::new(ids, edge_list)
}

impl FiniteMetricSpace {
    /// Builds a space whose vertex order is exactly `vertices`.
    pub fn new<S: AsRef<str>>(vertices: Vec<String>, edges: &[(S, S, f64)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, id) in vertices.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()));
        let mut indexed = Vec::with_capacity(edges.len());
        for (u, v, len) in edges {
            indexed.push((lookup(u.as_ref())?, lookup(v.as_ref())?, *len));
        }
        Self::from_indexed(vertices, indexed)
    }

    /// Builds a space from vertex ids and index-based edges.
    pub fn from_indexed(ids: Vec<String>, edges: Vec<(Vertex, Vertex, f64)>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (u, v, length) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(format!("#{}", u.max(v))));
            }
            if u == v {
                return Err(Error::SelfLoop(ids[u].clone()));
            }
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::BadLength { u: ids[u].clone(), v: ids[v].clone(), length });
            }
            canon.push(Edge { u: u.min(v), v: u.max(v), length });
        }
        canon.sort_by_key(|e| (e.u, e.v));
        for w in canon.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(Error::DuplicateEdge(ids[w[0].u].clone(), ids[w[0].v].clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &canon {
            adjacency[e.u].push((e.v, e.length));
            adjacency[e.v].push((e.u, e.length));
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|&(w, _)| w);
        }

        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adjacency, s)).collect();
        if let Some(far) = rows[0].iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected(ids[0].clone(), ids[far].clone()));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // Dijkstra from either end sums the same path in opposite
                // orders; keep the smaller so the matrix is exactly symmetric.
                dist[i * n + j] = if i == j { 0.0 } else { rows[i][j].min(rows[j][i]) };
            }
        }
        Ok(Self { ids, index, edges: canon, adjacency, dist })
    }

    /// Same vertices and topology, new edge lengths (given in canonical edge order).
    pub fn reweighted(&self, lengths: &[f64]) -> Result<Self> {
        assert_eq!(lengths.len(), self.edges.len(), "one length per edge");
        let edges = self.edges.iter().zip(lengths).map(|(e, &l)| (e.u, e.v, l)).collect();
        Self::from_indexed(self.ids.clone(), edges)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, v: Vertex) -> &str {
        &self.ids[v]
    }

    pub fn vertex(&self, id: &str) -> Result<Vertex> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    /// Canonical edges, `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `v` in increasing index order, with edge lengths.
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_length(&self, u: Vertex, v: Vertex) -> Option<f64> {
        let adj = &self.adjacency[u];
        adj.binary_search_by_key(&v, |&(w, _)| w).ok().map(|i| adj[i].1)
    }

    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> f64 {
        self.dist[u * self.ids.len() + v]
    }

    pub fn row(&self, u: Vertex) -> &[f64] {
        let n = self.ids.len();
        &self.dist[u * n..(u + 1) * n]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Largest length among edges incident to `v`.
    pub fn max_incident_length(&self, v: Vertex) -> f64 {
        self.adjacency[v].iter().map(|&(_, l)| l).fold(0.0, f64::max)
    }

    /// Distance from `v` to the nearest vertex of `set`, and that vertex
    /// (lowest index on ties).
    pub fn dist_to_set(&self, v: Vertex, set: &[Vertex]) -> (f64, Vertex) {
        let mut best = (f64::INFINITY, usize::MAX);
        for &w in set {
            let d = self.dist(v, w);
            if d < best.0 || (d == best.0 && w < best.1) {
                best = (d, w);
            }
        }
        best
    }

    /// Checks symmetry, identity and the triangle inequality to within
    /// 1e-12 (relative). Exhaustive up to [`METRIC_CHECK_EXHAUSTIVE`]
    /// vertices, otherwise `samples` seeded random triples. Returns the first
    /// violating triple.
    pub fn check_metric_axioms(&self, samples: usize, seed: u64) -> std::result::Result<(), (Vertex, Vertex, Vertex)> {
        let n = self.len();
        let tol = METRIC_TOL * (1.0 + self.diameter());
        let bad = |x: Vertex, y: Vertex, z: Vertex| {
            self.dist(x, x) != 0.0
                || (self.dist(x, y) - self.dist(y, x)).abs() > tol
                || (x != y && self.dist(x, y) <= 0.0)
                || self.dist(x, z) > self.dist(x, y) + self.dist(y, z) + tol
        };
        if n <= METRIC_CHECK_EXHAUSTIVE {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if bad(x, y, z) {
                            return Err((x, y, z));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if bad(x, y, z) {
                    return Err((x, y, z));
                }
            }
        }
        Ok(())
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem(f64, Vertex);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn dijkstra(adjacency: &[Vec<(Vertex, f64)>], source: Vertex) -> Vec<f64> {
    multi_source_dijkstra(adjacency, &[source])
}

pub(crate) fn multi_source_dijkstra(adjacency: &[Vec<(Vertex, f64)>], sources: &[Vertex]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, len) in &adjacency[u] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem(nd, w));
            }
        }
    }
    dist
}

/// Shortest-path distances from the nearest of `sources` to every vertex.
pub fn distances_from_set(space: &FiniteMetricSpace, sources: &[Vertex]) -> Vec<f64> {
    multi_source_dijkstra(&space.adjacency, sources)
}

/// A simple edge path with prefix sums of edge lengths.
///
/// `cumulative[0] == 0` and `cumulative.last() == length()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathArc {
    vertices: Vec<Vertex>,
    cumulative: Vec<f64>,
}

impl PathArc {
    pub fn from_vertices(space: &FiniteMetricSpace, vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Config("an arc needs at least one vertex".into()));
        }
        let mut seen = vec![false; space.len()];
        let mut cumulative = Vec::with_capacity(vertices.len());
        let mut acc = 0.0;
        for (i, &v) in vertices.iter().enumerate() {
            if v >= space.len() {
                return Err(Error::UnknownVertex(format!("#{v}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotSimple(space.id(v).to_string()));
            }
            if i > 0 {
                let u = vertices[i - 1];
                acc += space
                    .edge_length(u, v)
                    .ok_or_else(|| Error::NotAdjacent(space.id(u).to_string(), space.id(v).to_string()))?;
            }
            cumulative.push(acc);
        }
        Ok(Self { vertices, cumulative })
    }

    pub fn from_ids<S: AsRef<str>>(space: &FiniteMetricSpace, ids: &[S]) -> Result<Self> {
        let vs = ids.iter().map(|s| space.vertex(s.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::from_vertices(space, vs)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    pub fn reversed(&self) -> Self {
        let total = self.length();
        let vertices = self.vertices.iter().rev().copied().collect();
        let cumulative = self.cumulative.iter().rev().map(|c| total - c).collect();
        Self { vertices, cumulative }
    }

    /// The sub-arc between positions `i` and `j`, oriented from `i` to `j`.
    pub fn slice(&self, i: usize, j: usize) -> Self {
        if i <= j {
            let base = self.cumulative[i];
            Self {
                vertices: self.vertices[i..=j].to_vec(),
                cumulative: self.cumulative[i..=j].iter().map(|c| c - base).collect(),
            }
        } else {
            let base = self.cumulative[i];
            Self {
                vertices: self.vertices[j..=i].iter().rev().copied().collect(),
                cumulative: self.cumulative[j..=i].iter().rev().map(|c| base - c).collect(),
            }
        }
    }

    /// `γ[u, v]`, oriented from `u` to `v`.
    pub fn subarc(&self, space: &FiniteMetricSpace, u: Vertex, v: Vertex) -> Result<Self> {
        let i = self.position(u).ok_or_else(|| Error::NotOnArc(space.id(u).to_string()))?;
        let j = self.position(v).ok_or_else(|| Error::NotOnArc(space.id(v).to_string()))?;
        Ok(self.slice(i, j))
    }

    /// Position of the vertex whose cumulative length is nearest to `t`
    /// (earlier vertex on ties).
    pub fn index_at_arclength(&self, t: f64) -> Result<usize> {
        let total = self.length();
        let tol = length_tol(total);
        if !(t >= -tol && t <= total + tol) {
            return Err(Error::ArclengthOutOfRange { t, length: total });
        }
        let k = self.cumulative.partition_point(|&c| c < t);
        if k == 0 {
            return Ok(0);
        }
        if k == self.cumulative.len() {
            return Ok(k - 1);
        }
        let below = t - self.cumulative[k - 1];
        let above = self.cumulative[k] - t;
        Ok(if above < below { k } else { k - 1 })
    }

    pub fn point_at_arclength(&self, t: f64) -> Result<Vertex> {
        Ok(self.vertices[self.index_at_arclength(t)?])
    }
}

pub fn subarc(space: &FiniteMetricSpace, arc: &PathArc, u: Vertex, v: Vertex) -> Result<PathArc> {
    arc.subarc(space, u, v)
}

pub fn point_at_arclength(arc: &PathArc, t: f64) -> Result<Vertex> {
    arc.point_at_arclength(t)
}

/// `l(arc) <= |x - y| + h` for the arc's endpoints.
pub fn is_h_short(space: &FiniteMetricSpace, arc: &PathArc, h: f64) -> bool {
    let d = space.dist(arc.start(), arc.end());
    arc.length() <= d + h + length_tol(d) * 1e-3
}

/// Lexicographically smallest shortest path from `x` to `y`.
pub fn shortest_arc(space: &FiniteMetricSpace, x: Vertex, y: Vertex) -> PathArc {
    let tol = length_tol(space.dist(x, y));
    let mut path = vec![x];
    let mut cur = x;
    while cur != y {
        let here = space.dist(cur, y);
        let next = space
            .neighbors(cur)
            .iter()
            .find(|&&(w, len)| (len + space.dist(w, y) - here).abs() <= tol)
            .map(|&(w, _)| w)
            .expect("a geodesic neighbour always exists");
        path.push(next);
        cur = next;
    }
    PathArc::from_vertices(space, path).expect("geodesic is a simple edge path")
}

/// Parameters for a bounded depth-first search over simple paths.
#[derive(Debug, Clone, Copy)]
pub struct PathSearch {
    pub min_length: f64,
    pub max_length: f64,
    pub max_count: usize,
    pub expansion_budget: usize,
    /// Stop as soon as `max_count` paths are found instead of keeping the
    /// shortest `max_count`.
    pub first_found: bool,
}

#[derive(Debug, Clone)]
pub struct PathSearchOutcome {
    /// `(length, vertices)`, sorted by length then vertex sequence.
    pub paths: Vec<(f64, Vec<Vertex>)>,
    /// False if the expansion budget ran out before the search finished.
    pub complete: bool,
}

fn sort_paths(paths: &mut Vec<(f64, Vec<Vertex>)>) {
    paths.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    paths.dedup_by(|a, b| a.1 == b.1);
}

/// Enumerates simple paths `x -> y` with `min_length <= l <= max_length`,
/// pruning any prefix whose length plus the remaining distance exceeds the
/// bound. Neighbours are expanded in increasing index order.
pub fn search_simple_paths(space: &FiniteMetricSpace, x: Vertex, y: Vertex, opts: PathSearch) -> PathSearchOutcome {
    let tol = length_tol(opts.max_length);
    let mut bound = opts.max_length + tol;
    let mut found: Vec<(f64, Vec<Vertex>)> = Vec::new();
    if x == y {
        if opts.min_length <= tol {
            found.push((0.0, vec![x]));
        }
        return PathSearchOutcome { paths: found, complete: true };
    }
    let mut on_path = vec![false; space.len()];
    let mut path = vec![x];
    let mut lens = vec![0.0];
    let mut cursor = vec![0usize];
    on_path[x] = true;
    let mut expansions = 0usize;
    let mut complete = true;

    while let Some(&top) = path.last() {
        let ci = cursor.last_mut().unwrap();
        let nbrs = space.neighbors(top);
        if *ci >= nbrs.len() {
            on_path[top] = false;
            path.pop();
            lens.pop();
            cursor.pop();
            continue;
        }
        let (w, len) = nbrs[*ci];
        *ci += 1;
        if on_path[w] {
            continue;
        }
        let cur = lens.last().unwrap() + len;
        if cur + space.dist(w, y) > bound {
            continue;
        }
        expansions += 1;
        if expansions > opts.expansion_budget {
            complete = false;
            break;
        }
        if w == y {
            if cur >= opts.min_length - tol {
                let mut p = path.clone();
                p.push(y);
                found.push((cur, p));
                if opts.first_found && found.len() >= opts.max_count {
                    complete = false;
                    break;
                }
                if !opts.first_found && found.len() >= 4 * opts.max_count.max(1) {
                    sort_paths(&mut found);
                    found.truncate(opts.max_count);
                    if found.len() == opts.max_count {
                        bound = bound.min(found.last().unwrap().0 + tol);
                    }
                }
            }
            continue;
        }
        on_path[w] = true;
        path.push(w);
        lens.push(cur);
        cursor.push(0);
    }
    sort_paths(&mut found);
    found.truncate(opts.max_count);
    PathSearchOutcome { paths: found, complete }
}

/// All h-short simple paths from `x` to `y` of length at most
/// `min(|x-y| + h, length_cap)`, sorted by length then vertex order and
/// truncated to `max_count`. A shortest path is always included.
pub fn h_short_arcs(
    space: &FiniteMetricSpace,
    x: Vertex,
    y: Vertex,
    h: f64,
    length_cap: f64,
    max_count: usize,
) -> Vec<PathArc> {
    let d = space.dist(x, y);
    let bound = (d + h).min(length_cap.max(d));
    let max_count = max_count.max(1);
    let outcome = search_simple_paths(
        space,
        x,
        y,
        PathSearch {
            min_length: 0.0,
            max_length: bound,
            max_count,
            expansion_budget: DEFAULT_EXPANSION_BUDGET,
            first_found: false,
        },
    );
    let geodesic = shortest_arc(space, x, y);
    let mut paths = outcome.paths;
    if !paths.iter().any(|(_, p)| p == geodesic.vertices()) {
        paths.push((geodesic.length(), geodesic.vertices().to_vec()));
        sort_paths(&mut paths);
        if paths.len() > max_count {
            // keep the geodesic even if equal-length ties would push it out
            let keep = paths.iter().position(|(_, p)| p == geodesic.vertices()).unwrap();
            if keep >= max_count {
                paths.swap(keep, max_count - 1);
            }
            paths.truncate(max_count);
            sort_paths(&mut paths);
        }
    }
    paths
        .into_iter()
        .map(|(_, p)| PathArc::from_vertices(space, p).expect("search yields simple edge paths"))
        .collect()
}

/// Whether every vertex of `inner` lies within `radius` of some vertex of
/// `outer`. Also returns the inner vertex farthest from `outer` and its
/// distance.
pub fn neighborhood_contains(space: &FiniteMetricSpace, outer: &PathArc, inner: &PathArc, radius: f64) -> (bool, Vertex, f64) {
    let mut worst = (inner.start(), f64::NEG_INFINITY);
    for &v in inner.vertices() {
        let (d, _) = space.dist_to_set(v, outer.vertices());
        if d > worst.1 {
            worst = (v, d);
        }
    }
    (worst.1 <= radius + length_tol(radius) * 1e-3, worst.0, worst.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> FiniteMetricSpace {
        build_space(&[("0", "1", 1.0), ("1", "2", 1.0)]).unwrap()
    }

    pub(crate) fn cycle4() -> FiniteMetricSpace {
        build_space(&[("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0), ("3", "0", 1.0)]).unwrap()
    }

    /// Brute-force shortest walk lengths by enumerating all simple paths.
    fn enumerate_dist(space: &FiniteMetricSpace, x: Vertex, y: Vertex) -> f64 {
        fn go(s: &FiniteMetricSpace, cur: Vertex, y: Vertex, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if cur == y {
                *best = best.min(acc);
                return;
            }
            for &(w, l) in s.neighbors(cur) {
                if !seen[w] {
                    seen[w] = true;
                    go(s, w, y, seen, acc + l, best);
                    seen[w] = false;
                }
            }
        }
        let mut seen = vec![false; space.len()];
        seen[x] = true;
        let mut best = f64::INFINITY;
        go(space, x, y, &mut seen, 0.0, &mut best);
        best
    }

    #[test]
    fn build_space_examples() {
        let s = path3();
        assert_eq!(s.dist(s.vertex("0").unwrap(), s.vertex("2").unwrap()), 2.0);
        let s = build_space(&[("a", "b", 3.5)]).unwrap();
        assert_eq!(s.dist(0, 1), 3.5);
        let c = cycle4();
        assert_eq!(c.dist(c.vertex("0").unwrap(), c.vertex("2").unwrap()), 2.0);
        for x in 0..4 {
            for y in 0..4 {
                let want = if x == y { 0.0 } else { enumerate_dist(&c, x, y) };
                assert_eq!(c.dist(x, y), want);
            }
        }
    }

    #[test]
    fn build_space_rejects_bad_input() {
        let err = build_space(&[("a", "b", 1.0), ("c", "d", 1.0)]).unwrap_err();
        match err {
            Error::Disconnected(a, b) => assert_eq!((a.as_str(), b.as_str()), ("a", "c")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(build_space(&[("a", "b", 0.0)]), Err(Error::BadLength { .. })));
        assert!(matches!(build_space(&[("a", "b", -1.0)]), Err(Error::BadLength { .. })));
        assert!(matches!(build_space(&[("a", "a", 1.0)]), Err(Error::SelfLoop(_))));
        assert!(matches!(build_space(&[("a", "b", 1.0), ("b", "a", 2.0)]), Err(Error::DuplicateEdge(..))));
    }

    #[test]
    fn distances_independent_of_edge_order() {
        let fwd = [("a", "b", 0.3), ("b", "c", 0.7), ("c", "d", 0.1), ("a", "d", 1.3), ("b", "d", 0.45)];
        let mut rev = fwd;
        rev.reverse();
        let s1 = build_space(&fwd).unwrap();
        let s2 = build_space(&rev).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(s1.dist(x, y).to_bits(), s2.dist(x, y).to_bits());
            }
        }
        assert!(s1.check_metric_axioms(0, 0).is_ok());
    }

    #[test]
    fn is_h_short_examples() {
        let s = cycle4();
        let geo = shortest_arc(&s, 0, 2);
        assert!(is_h_short(&s, &geo, 0.0));
        // triangle with a detour: direct a-c = 1.0, via b = 1.2 / 1.05
        let t = build_space(&[("a", "c", 1.0), ("a", "b", 0.6), ("b", "c", 0.6)]).unwrap();
        let arc = PathArc::from_ids(&t, &["a", "b", "c"]).unwrap();
        assert!(!is_h_short(&t, &arc, 0.1));
        let t = build_space(&[("a", "c", 1.0), ("a", "b", 0.5), ("b", "c", 0.55)]).unwrap();
        let arc = PathArc::from_ids(&t, &["a", "b", "c"]).unwrap();
        assert!(is_h_short(&t, &arc, 1.0 / 13.0));
    }

    #[test]
    fn h_short_arc_examples() {
        let c = cycle4();
        let opp = h_short_arcs(&c, 0, 2, 0.0, 10.0, DEFAULT_MAX_ARCS);
        assert_eq!(opp.len(), 2);
        assert!(opp.iter().all(|a| a.length() == 2.0));
        assert_eq!(opp[0].vertices(), &[0, 1, 2]);
        assert_eq!(opp[1].vertices(), &[0, 3, 2]);
        let adj = h_short_arcs(&c, 0, 1, 0.5, 10.0, DEFAULT_MAX_ARCS);
        assert_eq!(adj.len(), 1);
        assert_eq!(adj[0].vertices(), &[0, 1]);
        // with enough slack the long way round qualifies too
        assert_eq!(h_short_arcs(&c, 0, 1, 2.0, 10.0, DEFAULT_MAX_ARCS).len(), 2);
        assert_eq!(h_short_arcs(&c, 0, 1, 2.0, 2.0, DEFAULT_MAX_ARCS).len(), 1);
        assert_eq!(h_short_arcs(&c, 2, 2, 1.0, 1.0, 4)[0].length(), 0.0);
    }

    #[test]
    fn h_short_arcs_truncate_keeping_a_geodesic() {
        // ladder graph: many near-geodesics
        let mut edges = Vec::new();
        for i in 0..6 {
            edges.push((format!("a{i}"), format!("a{}", i + 1), 1.0));
            edges.push((format!("b{i}"), format!("b{}", i + 1), 1.0));
            edges.push((format!("a{i}"), format!("b{i}"), 1.0));
        }
        edges.push(("a6".into(), "b6".into(), 1.0));
        let s = build_space(&edges).unwrap();
        let (x, y) = (s.vertex("a0").unwrap(), s.vertex("b6").unwrap());
        let arcs = h_short_arcs(&s, x, y, 0.0, 100.0, 3);
        assert_eq!(arcs.len(), 3);
        assert!(arcs.iter().all(|a| a.length() == 7.0));
        let all = h_short_arcs(&s, x, y, 0.0, 100.0, 100);
        assert_eq!(all.len(), 7);
        assert_eq!(&all[..3], &arcs[..]);
    }

    #[test]
    fn subarc_examples() {
        let s = build_space(&[("0", "1", 1.0), ("1", "2", 2.5), ("2", "3", 1.0)]).unwrap();
        let arc = PathArc::from_ids(&s, &["0", "1", "2", "3"]).unwrap();
        assert_eq!(arc.subarc(&s, 0, 3).unwrap(), arc);
        assert_eq!(arc.subarc(&s, 2, 2).unwrap().length(), 0.0);
        assert_eq!(arc.subarc(&s, 1, 2).unwrap().length(), 2.5);
        let back = arc.subarc(&s, 3, 1).unwrap();
        assert_eq!(back.vertices(), &[3, 2, 1]);
        assert_eq!(back.cumulative(), &[0.0, 1.0, 3.5]);
        let lone = build_space(&[("0", "1", 1.0), ("1", "9", 1.0)]).unwrap();
        let arc = PathArc::from_ids(&lone, &["0", "1"]).unwrap();
        assert!(matches!(arc.subarc(&lone, 0, 2), Err(Error::NotOnArc(_))));
    }

    #[test]
    fn point_at_arclength_examples() {
        let s = path3();
        let arc = PathArc::from_ids(&s, &["0", "1", "2"]).unwrap();
        assert_eq!(arc.point_at_arclength(0.0).unwrap(), 0);
        assert_eq!(arc.point_at_arclength(2.0).unwrap(), 2);
        assert_eq!(arc.point_at_arclength(0.9).unwrap(), 1);
        assert_eq!(arc.point_at_arclength(0.5).unwrap(), 0, "ties go to the earlier vertex");
        assert!(arc.point_at_arclength(2.5).is_err());
        assert!(arc.point_at_arclength(-0.1).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let c = cycle4();
        let a = PathArc::from_vertices(&c, vec![0, 1]).unwrap();
        let b = PathArc::from_vertices(&c, vec![3, 2]).unwrap();
        assert!(neighborhood_contains(&c, &a, &a, 0.1).0);
        let (ok, _, worst) = neighborhood_contains(&c, &a, &b, 1.0);
        assert!(ok);
        assert_eq!(worst, 1.0);
        assert!(!neighborhood_contains(&c, &a, &b, 0.5).0);
    }

    #[test]
    fn arcs_must_be_simple_edge_paths() {
        let c = cycle4();
        assert!(matches!(PathArc::from_vertices(&c, vec![0, 2]), Err(Error::NotAdjacent(..))));
        assert!(matches!(PathArc::from_vertices(&c, vec![0, 1, 0]), Err(Error::NotSimple(_))));
    }
}
