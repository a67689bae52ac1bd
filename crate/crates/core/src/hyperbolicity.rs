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

//! Gromov products, four-point hyperbolicity, slim triangles and the
//! classical tripod/projection estimates on h-short arcs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::busemann::BoundaryRay;
use crate::error::{Error, Result};
use crate::space::{is_h_short, length_tol, FiniteMetricSpace, PathArc, Vertex};

/// Largest vertex count for which [`delta_auto`] enumerates every quadruple.
pub const EXACT_DELTA_CUTOFF: usize = 200;

/// `(x|y)_p = (|x-p| + |y-p| - |x-y|) / 2`.
#[inline]
pub fn gromov_product(space: &FiniteMetricSpace, x: Vertex, y: Vertex, p: Vertex) -> f64 {
    (space.dist(x, p) + space.dist(y, p) - space.dist(x, y)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityEstimate {
    pub delta: f64,
    pub method: Method,
    pub quadruples_checked: u64,
    /// `(x, y, z, p)` attaining `delta`.
    pub worst_quadruple: [Vertex; 4],
}

/// Four-point defect `min((x|y)_p, (y|z)_p) - (x|z)_p`.
pub fn four_point_defect(space: &FiniteMetricSpace, x: Vertex, y: Vertex, z: Vertex, p: Vertex) -> f64 {
    gromov_product(space, x, y, p).min(gromov_product(space, y, z, p)) - gromov_product(space, x, z, p)
}

#[inline]
fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

#[inline]
fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

/// Best defect for a fixed base point: `(defect, x, y, z)`, smallest indices
/// on ties.
fn best_for_base(space: &FiniteMetricSpace, p: Vertex) -> (f64, Vertex, Vertex, Vertex) {
    let n = space.len();
    let dp = space.row(p);
    let mut g = vec![0.0; n * n];
    for x in 0..n {
        let dx = space.row(x);
        let gx = &mut g[x * n..(x + 1) * n];
        for y in 0..n {
            gx[y] = (dp[x] + dp[y] - dx[y]) / 2.0;
        }
    }
    let mut best = (0.0, 0, 0, 0);
    for x in 0..n {
        let gx = &g[x * n..(x + 1) * n];
        // the defect is symmetric in (x, z), so z < x repeats earlier work
        for z in x..n {
            let gz = &g[z * n..(z + 1) * n];
            let mut m = f64::NEG_INFINITY;
            for y in 0..n {
                m = fmax(m, fmin(gx[y], gz[y]));
            }
            let defect = m - gx[z];
            if defect > best.0 {
                let y = (0..n).find(|&y| fmin(gx[y], gz[y]) == m).unwrap();
                best = (defect, x, y, z);
            }
        }
    }
    best
}

/// Exact four-point δ over all ordered quadruples.
pub fn delta_exact(space: &FiniteMetricSpace) -> HyperbolicityEstimate {
    let n = space.len();
    let per_base: Vec<_> = (0..n).into_par_iter().map(|p| best_for_base(space, p)).collect();
    let mut best = (0.0, [0; 4]);
    for (p, (d, x, y, z)) in per_base.into_iter().enumerate() {
        if d > best.0 {
            best = (d, [x, y, z, p]);
        }
    }
    HyperbolicityEstimate {
        delta: best.0,
        method: Method::Exact,
        quadruples_checked: (n as u64).pow(4),
        worst_quadruple: best.1,
    }
}

/// Maximum defect over `budget` seeded uniform quadruples; a lower bound for
/// the exact value.
pub fn delta_sampled(space: &FiniteMetricSpace, budget: u64, seed: u64) -> HyperbolicityEstimate {
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (0.0, [0; 4]);
    for _ in 0..budget {
        let q = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        let d = four_point_defect(space, q[0], q[1], q[2], q[3]);
        if d > best.0 {
            best = (d, q);
        }
    }
    HyperbolicityEstimate { delta: best.0, method: Method::Sampled, quadruples_checked: budget, worst_quadruple: best.1 }
}

pub fn delta_four_point(space: &FiniteMetricSpace, method: Method, sample_budget: u64, seed: u64) -> HyperbolicityEstimate {
    match method {
        Method::Exact => delta_exact(space),
        Method::Sampled => delta_sampled(space, sample_budget, seed),
    }
}

/// Exact up to [`EXACT_DELTA_CUTOFF`] vertices, sampled beyond.
pub fn delta_auto(space: &FiniteMetricSpace, sample_budget: u64, seed: u64) -> HyperbolicityEstimate {
    let method = if space.len() <= EXACT_DELTA_CUTOFF { Method::Exact } else { Method::Sampled };
    delta_four_point(space, method, sample_budget, seed)
}

/// Slimness constant of h-short triangles implied by four-point δ.
pub fn rips_kappa(delta: f64, h: f64) -> f64 {
    3.0 * delta + 1.5 * h
}

/// Triangle with vertices `x, y, z` and h-short sides
/// `alpha: y -> z`, `beta: x -> z`, `gamma: x -> y`.
#[derive(Debug, Clone)]
pub struct ShortTriangle {
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
    pub alpha: PathArc,
    pub beta: PathArc,
    pub gamma: PathArc,
    pub h: f64,
}

impl ShortTriangle {
    pub fn new(space: &FiniteMetricSpace, alpha: PathArc, beta: PathArc, gamma: PathArc, h: f64) -> Result<Self> {
        let (x, y, z) = (gamma.start(), gamma.end(), alpha.end());
        if alpha.start() != y || beta.start() != x || beta.end() != z {
            return Err(Error::InconsistentTriangle("sides do not share endpoints".into()));
        }
        for (name, side) in [("alpha", &alpha), ("beta", &beta), ("gamma", &gamma)] {
            if !is_h_short(space, side, h) {
                return Err(Error::InconsistentTriangle(format!("side {name} is not {h}-short")));
            }
        }
        Ok(Self { x, y, z, alpha, beta, gamma, h })
    }

    /// Sides as `(name, arc, opposite vertex)`.
    pub fn sides(&self) -> [(&'static str, &PathArc, Vertex); 3] {
        [("alpha", &self.alpha, self.x), ("beta", &self.beta, self.y), ("gamma", &self.gamma, self.z)]
    }
}

/// Split of one side `s: a -> c` with opposite vertex `w` into `s_a`, the
/// core, and `s_c`, where `l(s_a) = (c|w)_a` and `l(s_c) = (a|w)_c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideSplit {
    pub side: &'static str,
    /// Position on the arc of the split vertex nearer the start.
    pub start_index: usize,
    /// Position on the arc of the split vertex nearer the end.
    pub end_index: usize,
    pub start_vertex: Vertex,
    pub end_vertex: Vertex,
    /// `l(s) - (c|w)_a - (a|w)_c`.
    pub core_length: f64,
    /// Largest arclength offset between a target split point and its vertex.
    pub snap: f64,
}

/// Snaps the point at arclength `t` on `arc`; returns position and offset.
pub(crate) fn snap_arclength(arc: &PathArc, t: f64) -> Result<(usize, f64)> {
    let i = arc.index_at_arclength(t)?;
    Ok((i, (arc.cumulative()[i] - t).abs()))
}

/// Splits `arc: a -> c` against the opposite vertex `w`.
pub fn split_side(space: &FiniteMetricSpace, side: &'static str, arc: &PathArc, w: Vertex) -> Result<SideSplit> {
    let (a, c) = (arc.start(), arc.end());
    let len = arc.length();
    let ta = gromov_product(space, c, w, a);
    let tc = gromov_product(space, a, w, c);
    let slack = length_tol(len);
    if ta > len + slack || tc > len + slack || ta + tc > len + slack {
        return Err(Error::InconsistentTriangle(format!(
            "side {side}: Gromov products {ta} and {tc} exceed its length {len}"
        )));
    }
    let (i, si) = snap_arclength(arc, ta.min(len))?;
    let (j, sj) = snap_arclength(arc, (len - tc).max(0.0))?;
    Ok(SideSplit {
        side,
        start_index: i,
        end_index: j,
        start_vertex: arc.vertices()[i],
        end_vertex: arc.vertices()[j],
        core_length: (len - ta - tc).max(0.0),
        snap: si.max(sj),
    })
}

/// Center splits of all three sides, in the order alpha, beta, gamma.
pub fn triangle_centers(space: &FiniteMetricSpace, tri: &ShortTriangle) -> Result<[SideSplit; 3]> {
    let [a, b, c] = tri.sides();
    Ok([split_side(space, a.0, a.1, a.2)?, split_side(space, b.0, b.1, b.2)?, split_side(space, c.0, c.1, c.2)?])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slimness {
    pub value: f64,
    pub side: &'static str,
    pub vertex: Vertex,
}

/// Largest distance from a vertex of one side to the union of the other two.
pub fn slimness(space: &FiniteMetricSpace, tri: &ShortTriangle) -> Slimness {
    let sides = tri.sides();
    let mut worst = Slimness { value: 0.0, side: sides[0].0, vertex: tri.y };
    for (k, (name, arc, _)) in sides.iter().enumerate() {
        let others: Vec<Vertex> = sides
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .flat_map(|(_, s)| s.1.vertices().iter().copied())
            .collect();
        for &v in arc.vertices() {
            let (d, _) = space.dist_to_set(v, &others);
            if d > worst.value {
                worst = Slimness { value: d, side: name, vertex: v };
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripodOutcome {
    pub holds: bool,
    /// Largest of `|x1 - x2| + h` and `|x1 - x2'|`, both compared with
    /// `bound`.
    pub worst: f64,
    /// `4δ + 2h`.
    pub bound: f64,
    /// Largest snap slack used by any matched point.
    pub slack: f64,
    pub witness: Option<(Vertex, Vertex)>,
}

/// Vertex of `arc` standing in for the point at distance `t` from the start.
/// Returns the nearer endpoint (to `x1`) of the first edge where the distance
/// from the start crosses `t`, with half that edge as slack, or an exact hit
/// with zero slack.
fn match_by_distance(space: &FiniteMetricSpace, arc: &PathArc, t: f64, x1: Vertex) -> (Vertex, f64) {
    let a = arc.start();
    let tol = length_tol(t);
    let vs = arc.vertices();
    if let Some(&v) = vs.iter().find(|&&v| (space.dist(a, v) - t).abs() <= tol) {
        return (v, 0.0);
    }
    for w in vs.windows(2) {
        let (d0, d1) = (space.dist(a, w[0]), space.dist(a, w[1]));
        if (d0 - t) * (d1 - t) < 0.0 {
            let len = space.edge_length(w[0], w[1]).unwrap();
            let v = if space.dist(x1, w[0]) <= space.dist(x1, w[1]) { w[0] } else { w[1] };
            return (v, len / 2.0);
        }
    }
    let v = *vs.last().unwrap();
    (v, (space.dist(a, v) - t).abs())
}

/// Tripod estimate for two h-short arcs from a common start: points of
/// `alpha1` within `(b1|b2)_a` of `a` are `4δ + h` close to the point of
/// `alpha2` at the same distance from `a` and `4δ + 2h` close to the point
/// at the same arclength.
pub fn tripod_check(space: &FiniteMetricSpace, alpha1: &PathArc, alpha2: &PathArc, h: f64, delta: f64) -> Result<TripodOutcome> {
    let a = alpha1.start();
    if alpha2.start() != a {
        return Err(Error::InconsistentTriangle("tripod arcs must share their first vertex".into()));
    }
    let reach = gromov_product(space, alpha1.end(), alpha2.end(), a);
    let tol = length_tol(reach);
    let bound = 4.0 * delta + 2.0 * h;
    let mut out = TripodOutcome { holds: true, worst: 0.0, bound, slack: 0.0, witness: None };
    for (i, &x1) in alpha1.vertices().iter().enumerate() {
        let t = space.dist(a, x1);
        if t > reach + tol {
            continue;
        }
        let (x2, s2) = match_by_distance(space, alpha2, t, x1);
        let arclen = alpha1.cumulative()[i].min(alpha2.length());
        let (j, s3) = snap_arclength(alpha2, arclen)?;
        let x2p = alpha2.vertices()[j];
        out.slack = out.slack.max(s2).max(s3);
        for (v, value) in [(x2, space.dist(x1, x2) + h), (x2p, space.dist(x1, x2p))] {
            if value > out.worst || out.witness.is_none() {
                out.worst = out.worst.max(value);
                out.witness = Some((x1, v));
            }
        }
    }
    out.holds = out.worst <= bound + out.slack + length_tol(bound);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ProjectionOutcome {
    Checked { holds: bool, separation: f64, bound: f64, y1: Vertex, y2: Vertex },
    Inconclusive { reason: String },
}

/// Nearest vertex of `arc` to `x`, lowest index on ties.
pub fn nearest_on_arc(space: &FiniteMetricSpace, arc: &PathArc, x: Vertex) -> (Vertex, f64) {
    let (d, v) = space.dist_to_set(x, arc.vertices());
    (v, d)
}

/// Projection estimate: points at distance at least `r` from an h-short arc
/// and closer than `2r - 4κ - h` to each other project within `8κ + 2h`.
pub fn projection_check(space: &FiniteMetricSpace, gamma: &PathArc, x1: Vertex, x2: Vertex, r: f64, kappa: f64, h: f64) -> ProjectionOutcome {
    let (y1, d1) = nearest_on_arc(space, gamma, x1);
    let (y2, d2) = nearest_on_arc(space, gamma, x2);
    if d1 < r || d2 < r {
        return ProjectionOutcome::Inconclusive { reason: format!("distances to the arc {d1}, {d2} fall below R = {r}") };
    }
    let limit = 2.0 * r - 4.0 * kappa - h;
    if space.dist(x1, x2) >= limit {
        return ProjectionOutcome::Inconclusive {
            reason: format!("|x1 - x2| = {} is not below 2R - 4κ - h = {limit}", space.dist(x1, x2)),
        };
    }
    let bound = 8.0 * kappa + 2.0 * h;
    let separation = space.dist(y1, y2);
    ProjectionOutcome::Checked { holds: separation <= bound + length_tol(bound), separation, bound, y1, y2 }
}

/// Index where the tail (last quarter, at least two anchors) of a ray of
/// `n` anchors begins.
pub fn tail_start(n: usize) -> usize {
    n.saturating_sub((n / 4).max(2))
}

/// `[min, max]` of `(u_i|v_i)_o` over the common tail of two rays.
pub fn boundary_gromov_product(space: &FiniteMetricSpace, ray1: &BoundaryRay, ray2: &BoundaryRay, o: Vertex) -> Result<(f64, f64)> {
    ray1.check_length()?;
    ray2.check_length()?;
    let n = ray1.anchors.len().min(ray2.anchors.len());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in tail_start(n)..n {
        let g = gromov_product(space, ray1.anchors[i], ray2.anchors[i], o);
        lo = lo.min(g);
        hi = hi.max(g);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, shortest_arc};

    fn cycle4() -> FiniteMetricSpace {
        build_space(&[("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0), ("3", "0", 1.0)]).unwrap()
    }

    fn brute_delta(s: &FiniteMetricSpace) -> f64 {
        let n = s.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for p in 0..n {
                        best = best.max(four_point_defect(s, x, y, z, p));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn gromov_product_examples() {
        let c = cycle4();
        assert_eq!(gromov_product(&c, 0, 1, 3), 1.0);
        assert_eq!(gromov_product(&c, 2, 2, 0), 2.0);
        let p = build_space(&[("0", "1", 1.0), ("1", "2", 1.0)]).unwrap();
        assert_eq!(gromov_product(&p, 0, 2, 1), 0.0);
    }

    #[test]
    fn delta_examples() {
        let c = cycle4();
        let est = delta_exact(&c);
        assert_eq!(est.delta, 1.0);
        assert_eq!(est.delta, brute_delta(&c));
        let [x, y, z, p] = est.worst_quadruple;
        assert_eq!(four_point_defect(&c, x, y, z, p), 1.0);
        assert_eq!(delta_exact(&build_space(&[("a", "b", 2.0)]).unwrap()).delta, 0.0);
        let star = build_space(&[("c", "a", 1.0), ("c", "b", 2.0), ("c", "d", 0.5), ("d", "e", 1.5)]).unwrap();
        assert_eq!(delta_exact(&star).delta, 0.0);
        assert!(delta_sampled(&c, 500, 3).delta <= 1.0);
    }

    #[test]
    fn rips_kappa_examples() {
        assert_eq!(rips_kappa(0.0, 0.0), 0.0);
        assert_eq!(rips_kappa(1.0, 0.0), 3.0);
        assert_eq!(rips_kappa(0.5, 1.0 / 14.0), 1.6071428571428572);
    }

    #[test]
    fn tree_triangle_has_zero_core() {
        let t = build_space(&[("r", "a", 1.0), ("a", "x", 1.0), ("a", "y", 1.0), ("r", "z", 1.0)]).unwrap();
        let (x, y, z) = (t.vertex("x").unwrap(), t.vertex("y").unwrap(), t.vertex("z").unwrap());
        let tri = ShortTriangle::new(&t, shortest_arc(&t, y, z), shortest_arc(&t, x, z), shortest_arc(&t, x, y), 0.0).unwrap();
        for split in triangle_centers(&t, &tri).unwrap() {
            assert_eq!(split.core_length, 0.0);
            assert_eq!(split.snap, 0.0);
            assert_eq!(split.start_vertex, split.end_vertex);
        }
        assert_eq!(slimness(&t, &tri).value, 0.0);
    }

    #[test]
    fn degenerate_triangle_split() {
        // z on gamma: the split of gamma lands on z at distance |x - z|
        let p = build_space(&[("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0)]).unwrap();
        let tri = ShortTriangle::new(&p, shortest_arc(&p, 3, 1), shortest_arc(&p, 0, 1), shortest_arc(&p, 0, 3), 0.0).unwrap();
        let g = &triangle_centers(&p, &tri).unwrap()[2];
        assert_eq!(g.start_vertex, 1);
        assert_eq!(tri.gamma.cumulative()[g.start_index], 1.0);
    }

    #[test]
    fn cycle_triangle_via_both_routes() {
        let c = cycle4();
        let b = PathArc::from_vertices(&c, vec![0, 3, 2]).unwrap();
        // x = 0, y = 2 with gamma through 3, z = 1
        let tri = ShortTriangle::new(
            &c,
            PathArc::from_vertices(&c, vec![2, 1]).unwrap(),
            PathArc::from_vertices(&c, vec![0, 1]).unwrap(),
            b.clone(),
            0.0,
        )
        .unwrap();
        let splits = triangle_centers(&c, &tri).unwrap();
        // (2|1)_0 = 1 and (0|1)_2 = 1: gamma's split points both sit at its midpoint 3
        assert_eq!(splits[2].start_vertex, 3);
        assert_eq!(splits[2].end_vertex, 3);
        let s = slimness(&c, &tri);
        assert_eq!(s.value, 1.0);
        assert_eq!(s.vertex, 3);
    }

    #[test]
    fn tripod_examples() {
        let t = build_space(&[("r", "a", 1.0), ("a", "x", 1.0), ("a", "y", 1.0)]).unwrap();
        let (r, x, y) = (t.vertex("r").unwrap(), t.vertex("x").unwrap(), t.vertex("y").unwrap());
        let out = tripod_check(&t, &shortest_arc(&t, r, x), &shortest_arc(&t, r, y), 0.0, 0.0).unwrap();
        assert!(out.holds);
        assert_eq!(out.worst, 0.0);
        let c = cycle4();
        let a1 = PathArc::from_vertices(&c, vec![0, 1, 2]).unwrap();
        let a2 = PathArc::from_vertices(&c, vec![0, 3, 2]).unwrap();
        assert!(tripod_check(&c, &a1, &a1, 0.0, 0.0).unwrap().holds);
        let out = tripod_check(&c, &a1, &a2, 0.0, 1.0).unwrap();
        assert!(out.holds);
        assert!(out.worst <= 2.0);
    }

    #[test]
    fn projection_examples() {
        // comb: spine 0..6, teeth of height 3 at 1 and 5
        let mut edges = vec![];
        for i in 0..6 {
            edges.push((format!("s{i}"), format!("s{}", i + 1), 1.0));
        }
        for base in [1, 5] {
            edges.push((format!("s{base}"), format!("t{base}_1"), 1.0));
            for k in 1..3 {
                edges.push((format!("t{base}_{k}"), format!("t{base}_{}", k + 1), 1.0));
            }
        }
        let s = build_space(&edges).unwrap();
        let spine = shortest_arc(&s, s.vertex("s0").unwrap(), s.vertex("s6").unwrap());
        let tip = s.vertex("t1_3").unwrap();
        match projection_check(&s, &spine, tip, tip, 3.0, 0.0, 0.0) {
            ProjectionOutcome::Checked { holds, separation, .. } => assert!(holds && separation == 0.0),
            other => panic!("{other:?}"),
        }
        // far-apart tips violate the closeness precondition
        let other = s.vertex("t5_3").unwrap();
        assert!(matches!(projection_check(&s, &spine, tip, other, 3.0, 0.0, 0.0), ProjectionOutcome::Inconclusive { .. }));
        assert!(matches!(projection_check(&s, &spine, tip, tip, 4.0, 0.0, 0.0), ProjectionOutcome::Inconclusive { .. }));
    }

    #[test]
    fn tail_sizes() {
        assert_eq!(tail_start(8), 6);
        assert_eq!(tail_start(16), 12);
        assert_eq!(tail_start(100), 75);
    }
}
