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

//! The individual checks. Each returns one [`CheckResult`]; per-pair work
//! runs in parallel and is reduced in pair order, so results do not depend
//! on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{CheckResult, Context, Slack, FLOAT_TOL};
use crate::busemann::{product_decomposition as product_residual, check_harnack, gromov_product_b, BoundaryRay};
use crate::hyperbolicity::{
    gromov_product, projection_check, slimness, snap_arclength, tripod_check, ProjectionOutcome, ShortTriangle,
};
use crate::sampling::unordered_pairs;
use crate::space::{h_short_arcs, length_tol, search_simple_paths, PathArc, PathSearch, Vertex};

/// Pairs checked exhaustively by the Harnack check up to this many vertices.
pub const HARNACK_EXHAUSTIVE: usize = 300;

/// Families examined by the more expensive path-search checks.
pub const SEARCH_PAIRS: usize = 200;

/// Triangles are built on this many sampled pairs.
pub const TRIANGLE_PAIRS: usize = 200;

const SEARCH_BUDGET: usize = 20_000;

fn float_slack(scale: f64) -> Slack {
    Slack { float: FLOAT_TOL * (1.0 + scale.abs()), ..Slack::default() }
}

/// Keeps the first strictly largest value with its witness.
struct Worst {
    value: f64,
    witness: Value,
}

impl Worst {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, witness: Value::Null }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Value) {
        if value > self.value {
            self.value = value;
            self.witness = witness();
        }
    }

    fn merge(&mut self, other: Worst) {
        if other.value > self.value {
            *self = other;
        }
    }

    fn value_or(&self, default: f64) -> f64 {
        if self.value == f64::NEG_INFINITY {
            default
        } else {
            self.value
        }
    }
}

fn ids(ctx: &Context, vs: &[Vertex]) -> Value {
    Value::Array(vs.iter().map(|&v| Value::String(ctx.id(v).to_string())).collect())
}

fn with_fields(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

/// `ρ(x)/ρ(y)` stays within `e^{±(ε|x-y| + 10εδ)}`.
pub fn check_harnack_pairs(ctx: &Context) -> CheckResult {
    let n = ctx.space.len();
    let pairs = unordered_pairs(n, HARNACK_EXHAUSTIVE, 20 * ctx.families.len().max(1), ctx.seed);
    let out = check_harnack(ctx.space, &ctx.field, ctx.epsilon, ctx.delta, &pairs);
    let bound = 10.0 * ctx.epsilon * ctx.delta;
    let worst = (out.worst_margin + bound).max(0.0);
    let (x, y) = out.worst_pair;
    CheckResult::measured(
        "harnack",
        bound,
        worst,
        float_slack(ctx.epsilon * ctx.space.diameter()),
        json!({ "pair": ids(ctx, &[x, y]), "pairs_checked": out.pairs_checked, "measure": "max ε(|b(x)-b(y)| - |x-y|)" }),
        None,
    )
}

/// `(x|y)_b` against `(x|y)_o - (x|ω)_o - (ω|y)_o` on pairs whose products
/// with ω the ray tail resolves.
pub fn check_product_decomposition(ctx: &Context) -> CheckResult {
    let (s, f, o) = (ctx.space, &ctx.field, ctx.field.o);
    let mut worst = Worst::new();
    let mut checked = 0usize;
    for fam in &ctx.families {
        if !(f.resolves(s, fam.x, o, ctx.delta) && f.resolves(s, fam.y, o, ctx.delta)) {
            continue;
        }
        checked += 1;
        let r = product_residual(s, f, fam.x, fam.y, ctx.delta, 0.0).residual;
        worst.offer(r, || json!({ "pair": ids(ctx, &[fam.x, fam.y]) }));
    }
    let bound = 10.0 * ctx.delta;
    if checked == 0 {
        return CheckResult::inconclusive("product_decomposition", bound, "no sampled pair is resolved by the ray tail");
    }
    let slack = Slack { anchor: f.anchor_error, ..float_slack(s.diameter()) };
    let witness = with_fields(worst.witness.clone(), json!({ "pairs_checked": checked, "pairs_skipped": ctx.families.len() - checked }));
    CheckResult::measured("product_decomposition", bound, worst.value, slack, witness, None)
}

/// Deformed edge weights stay within `e^{-20εδ-3ε} ρ len` and
/// `2 e^{5ε+20εδ} ρ len` of either endpoint's density.
pub fn check_local_bilipschitz(ctx: &Context) -> CheckResult {
    let (eps, delta) = (ctx.epsilon, ctx.delta);
    let mut worst = Worst::new();
    for (e, &w) in ctx.space.edges().iter().zip(&ctx.deformation.edge_weights) {
        for end in [e.u, e.v] {
            let rho = ctx.deformation.density(end);
            let lower = (-20.0 * eps * delta - 3.0 * eps).exp() * rho * e.length;
            let upper = 2.0 * (5.0 * eps + 20.0 * eps * delta).exp() * rho * e.length;
            let excess = (w / upper).ln().max((lower / w).ln());
            worst.offer(excess, || json!({ "edge": ids(ctx, &[e.u, e.v]), "endpoint": ctx.id(end), "weight": w, "lower": lower, "upper": upper }));
        }
    }
    CheckResult::measured("local_bilipschitz", 0.0, worst.value_or(0.0), float_slack(0.0), worst.witness, None)
}

fn first_and_last(arcs: Vec<PathArc>) -> Vec<PathArc> {
    match arcs.len() {
        0 | 1 => arcs,
        n => {
            let last = arcs[n - 1].clone();
            vec![arcs.into_iter().next().unwrap(), last]
        }
    }
}

/// h-short triangles on sampled vertex triples, built from the shortest and
/// the longest qualifying arc of every side.
pub fn sample_triangles(ctx: &Context) -> Vec<ShortTriangle> {
    let s = ctx.space;
    let n = s.len();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x7269_7073);
    let mut triples = Vec::new();
    for fam in ctx.families.iter().take(TRIANGLE_PAIRS) {
        if n < 3 {
            break;
        }
        let z = loop {
            let z = rng.gen_range(0..n);
            if z != fam.x && z != fam.y {
                break z;
            }
        };
        triples.push((fam, z));
    }
    triples
        .par_iter()
        .flat_map_iter(|&(fam, z)| {
            let short = |a: Vertex, b: Vertex| first_and_last(h_short_arcs(s, a, b, ctx.h, f64::INFINITY, ctx.max_arcs));
            let gammas = first_and_last(fam.arcs.clone());
            let alphas = short(fam.y, z);
            let betas = short(fam.x, z);
            let mut out = Vec::new();
            for g in &gammas {
                for a in &alphas {
                    for b in &betas {
                        if let Ok(t) = ShortTriangle::new(s, a.clone(), b.clone(), g.clone(), ctx.h) {
                            out.push(t);
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Every side of a sampled h-short triangle lies within `κ = 3δ + 3h/2` of
/// the other two.
pub fn check_rips_slimness(ctx: &Context) -> CheckResult {
    let tris = sample_triangles(ctx);
    if tris.is_empty() {
        return CheckResult::inconclusive("rips_slimness", ctx.kappa, "no triangles could be sampled");
    }
    let mut worst = Worst::new();
    for t in &tris {
        let sl = slimness(ctx.space, t);
        worst.offer(sl.value, || json!({ "triangle": ids(ctx, &[t.x, t.y, t.z]), "side": sl.side, "vertex": ctx.id(sl.vertex) }));
    }
    let witness = with_fields(worst.witness.clone(), json!({ "triangles": tris.len() }));
    CheckResult::measured("rips_slimness", ctx.kappa, worst.value, float_slack(ctx.kappa), witness, None)
}

/// Tripod estimate at every corner of the sampled triangles.
pub fn check_tripod(ctx: &Context) -> CheckResult {
    let tris = sample_triangles(ctx);
    let bound = 4.0 * ctx.delta + 2.0 * ctx.h;
    if tris.is_empty() {
        return CheckResult::inconclusive("tripod", bound, "no triangles could be sampled");
    }
    let mut worst = Worst::new();
    let mut snap = 0.0f64;
    let mut count = 0usize;
    for t in &tris {
        let corners = [
            (t.beta.clone(), t.gamma.clone()),
            (t.alpha.clone(), t.gamma.reversed()),
            (t.beta.reversed(), t.alpha.reversed()),
        ];
        for (a1, a2) in &corners {
            let Ok(out) = tripod_check(ctx.space, a1, a2, ctx.h, ctx.delta) else { continue };
            count += 1;
            snap = snap.max(out.slack);
            worst.offer(out.worst, || {
                let (p, q) = out.witness.unwrap_or((a1.start(), a1.start()));
                json!({ "corner": ctx.id(a1.start()), "points": ids(ctx, &[p, q]) })
            });
        }
    }
    let witness = with_fields(worst.witness.clone(), json!({ "tripods": count }));
    CheckResult::measured("tripod", bound, worst.value_or(0.0), Slack { snap, ..float_slack(bound) }, witness, None)
}

/// Projections to an h-short arc of nearby far-away points stay within
/// `8κ + 2h`.
pub fn check_projection(ctx: &Context) -> CheckResult {
    let s = ctx.space;
    let bound = 8.0 * ctx.kappa + 2.0 * ctx.h;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x7072_6f6a);
    let mut worst = Worst::new();
    let mut checked = 0usize;
    for fam in ctx.families.iter().take(SEARCH_PAIRS * 2) {
        let gamma = &fam.arcs[0];
        let x1 = rng.gen_range(0..s.len());
        let nb = s.neighbors(x1);
        let x2 = if rng.gen_bool(0.5) || nb.is_empty() { x1 } else { nb[rng.gen_range(0..nb.len())].0 };
        let r = s.dist_to_set(x1, gamma.vertices()).0.min(s.dist_to_set(x2, gamma.vertices()).0);
        if r <= 0.0 {
            continue;
        }
        if let ProjectionOutcome::Checked { separation, y1, y2, .. } = projection_check(s, gamma, x1, x2, r, ctx.kappa, ctx.h) {
            checked += 1;
            worst.offer(separation, || json!({ "arc": ids(ctx, &[gamma.start(), gamma.end()]), "points": ids(ctx, &[x1, x2]), "projections": ids(ctx, &[y1, y2]), "R": r }));
        }
    }
    if checked == 0 {
        return CheckResult::inconclusive("projection", bound, "no sampled configuration met the distance preconditions");
    }
    let witness = with_fields(worst.witness.clone(), json!({ "configurations": checked }));
    CheckResult::measured("projection", bound, worst.value, float_slack(bound), witness, None)
}

/// `l_ε(α) <= K d_ε(x, y)` for every qualifying arc `α`.
pub fn check_gehring_hayman(ctx: &Context) -> CheckResult {
    let d = &ctx.deformation;
    let per: Vec<(Worst, usize, usize)> = ctx
        .families
        .par_iter()
        .map(|fam| {
            let mut w = Worst::new();
            let de = d.distance(fam.x, fam.y);
            let dist = ctx.space.dist(fam.x, fam.y);
            let mut nontrivial = 0;
            for arc in &fam.arcs {
                if arc.length() > dist + length_tol(dist) {
                    nontrivial += 1;
                }
                let ratio = d.length(arc) / de;
                w.offer(ratio, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "arc": ids(ctx, arc.vertices()), "arc_length": arc.length(), "distance": dist }));
            }
            (w, fam.arcs.len(), nontrivial)
        })
        .collect();
    let mut worst = Worst::new();
    let (mut arcs, mut nontrivial) = (0, 0);
    for (w, a, nt) in per {
        worst.merge(w);
        arcs += a;
        nontrivial += nt;
    }
    let k = ctx.ledger.k_gh;
    if arcs == 0 {
        return CheckResult::inconclusive("gehring_hayman", k, "no pairs sampled");
    }
    let witness = with_fields(worst.witness.clone(), json!({ "pairs": ctx.families.len(), "arcs": arcs, "non_shortest_arcs": nontrivial }));
    let reason = (!ctx.ledger.within_epsilon0()).then(|| format!("ε = {} exceeds ε₀ = {}", ctx.epsilon, ctx.ledger.epsilon0));
    CheckResult::measured("gehring_hayman", k, worst.value, float_slack(k), witness, reason)
}

/// On pairs closer than `1/(24λ²ε)`, arcs at least `6λ²` times longer than
/// the distance are never shorter in the deformed metric than a qualifying
/// arc.
pub fn check_long_arc_exchange(ctx: &Context) -> CheckResult {
    let (s, d) = (ctx.space, &ctx.deformation);
    let factor = 6.0 * ctx.ledger.lambda * ctx.ledger.lambda;
    let cap = s.diameter();
    let candidates: Vec<_> = ctx
        .families
        .iter()
        .filter(|f| s.dist(f.x, f.y) <= ctx.ledger.short_scale)
        .take(SEARCH_PAIRS)
        .collect();
    let per: Vec<(Worst, usize)> = candidates
        .par_iter()
        .map(|fam| {
            let dist = s.dist(fam.x, fam.y);
            let found = search_simple_paths(
                s,
                fam.x,
                fam.y,
                PathSearch {
                    min_length: factor * dist,
                    max_length: factor * dist + cap,
                    max_count: 4,
                    expansion_budget: SEARCH_BUDGET,
                    first_found: true,
                },
            );
            let mut w = Worst::new();
            for (len, path) in &found.paths {
                let long = PathArc::from_vertices(s, path.clone()).unwrap();
                let long_eps = d.length(&long);
                for arc in &fam.arcs {
                    w.offer(d.length(arc) / long_eps, || {
                        json!({ "pair": ids(ctx, &[fam.x, fam.y]), "long_arc_length": len, "short_arc": ids(ctx, arc.vertices()) })
                    });
                }
            }
            (w, found.paths.len())
        })
        .collect();
    let mut worst = Worst::new();
    let mut long_arcs = 0;
    for (w, c) in per {
        worst.merge(w);
        long_arcs += c;
    }
    if long_arcs == 0 {
        return CheckResult::inconclusive("long_arc_exchange", 1.0, "no sampled pair admits an arc long enough");
    }
    let witness = with_fields(worst.witness.clone(), json!({ "long_arcs": long_arcs, "pairs": candidates.len() }));
    CheckResult::measured("long_arc_exchange", 1.0, worst.value, float_slack(1.0), witness, None)
}

/// `l(γ[u, v]) <= M|u - v| + C` whenever `|u - v| <= L`.
fn chord_arc(ctx: &Context, arc: &PathArc) -> bool {
    let (m, c, l) = (ctx.ledger.m, ctx.ledger.c, ctx.ledger.l);
    let vs = arc.vertices();
    let cum = arc.cumulative();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let d = ctx.space.dist(vs[i], vs[j]);
            if d <= l && cum[j] - cum[i] > m * d + c + length_tol(cum[j]) {
                return false;
            }
        }
    }
    true
}

/// Arcs satisfying the chord-arc hypothesis stay within `L` of every
/// qualifying arc between the same endpoints.
pub fn check_neighborhood_containment(ctx: &Context) -> CheckResult {
    let s = ctx.space;
    let (m, c, l) = (ctx.ledger.m, ctx.ledger.c, ctx.ledger.l);
    let per: Vec<(Worst, usize, usize)> = ctx
        .families
        .par_iter()
        .take(SEARCH_PAIRS)
        .map(|fam| {
            let dist = s.dist(fam.x, fam.y);
            let found = search_simple_paths(
                s,
                fam.x,
                fam.y,
                PathSearch { min_length: 0.0, max_length: m * dist + c, max_count: 8, expansion_budget: SEARCH_BUDGET, first_found: false },
            );
            let mut w = Worst::new();
            let (mut used, mut skipped) = (0, 0);
            for (_, path) in found.paths {
                let gamma = PathArc::from_vertices(s, path).unwrap();
                if !chord_arc(ctx, &gamma) {
                    skipped += 1;
                    continue;
                }
                used += 1;
                for alpha in &fam.arcs {
                    let (_, v, dv) = crate::space::neighborhood_contains(s, alpha, &gamma, l);
                    w.offer(dv, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "curve": ids(ctx, gamma.vertices()), "farthest_vertex": ctx.id(v) }));
                }
            }
            (w, used, skipped)
        })
        .collect();
    let mut worst = Worst::new();
    let (mut used, mut skipped) = (0, 0);
    for (w, u, sk) in per {
        worst.merge(w);
        used += u;
        skipped += sk;
    }
    if used == 0 {
        return CheckResult::inconclusive("neighborhood_containment", l, "no candidate curve satisfied the chord-arc hypothesis");
    }
    let witness = with_fields(worst.witness.clone(), json!({ "curves": used, "curves_skipped": skipped }));
    CheckResult::measured("neighborhood_containment", l, worst.value, float_slack(l), witness, None)
}

/// Largest `|u - z| - (f(u) - f(z))` over `z` in the first `end + 1`
/// vertices of the arc and `u` before `z`.
fn cone_deficit(ctx: &Context, arc: &PathArc, end: usize, f: impl Fn(Vertex) -> f64) -> (f64, Vertex, Vertex) {
    let vs = arc.vertices();
    let mut best = (f64::NEG_INFINITY, vs[0], vs[0]);
    for k in 0..=end {
        let z = vs[k];
        let fz = f(z);
        for &u in &vs[..=k] {
            let deficit = ctx.space.dist(u, z) - (f(u) - fz);
            if deficit > best.0 {
                best = (deficit, u, z);
            }
        }
    }
    best
}

/// Along an h-short arc from `x`, up to the split point towards `p`,
/// distance to `p` decreases at nearly unit rate:
/// `|p - u| - |p - z| >= |u - z| - 8δ - 8h`.
pub fn check_point_cone(ctx: &Context) -> CheckResult {
    let s = ctx.space;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x636f_6e65);
    let bases: Vec<Vertex> = ctx.families.iter().map(|_| rng.gen_range(0..s.len())).collect();
    let per: Vec<(Worst, f64)> = ctx
        .families
        .par_iter()
        .zip(&bases)
        .map(|(fam, &p)| {
            let mut w = Worst::new();
            let mut snap = 0.0f64;
            for arc in &fam.arcs {
                let t = (arc.length() - gromov_product(s, fam.x, p, fam.y)).clamp(0.0, arc.length());
                let Ok((end, off)) = snap_arclength(arc, t) else { continue };
                snap = snap.max(2.0 * off);
                let (def, u, z) = cone_deficit(ctx, arc, end, |v| s.dist(p, v));
                w.offer(def, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "p": ctx.id(p), "u": ctx.id(u), "z": ctx.id(z) }));
            }
            (w, snap)
        })
        .collect();
    let mut worst = Worst::new();
    let mut snap = 0.0f64;
    for (w, sn) in per {
        worst.merge(w);
        snap = snap.max(sn);
    }
    let bound = 8.0 * ctx.delta + 8.0 * ctx.h;
    CheckResult::measured("point_cone", bound, worst.value_or(0.0), Slack { snap, ..float_slack(s.diameter()) }, worst.witness, None)
}

/// Position on `arc: x -> y` of `y'` with `l(γ[y', y]) = (x|ω)_y`, and the
/// snap offset.
fn omega_split(ctx: &Context, arc: &PathArc, x: Vertex, y: Vertex) -> Option<(usize, f64)> {
    let t = (arc.length() - ctx.field.omega_product(ctx.space, x, y)).clamp(0.0, arc.length());
    snap_arclength(arc, t).ok()
}

/// Up to the split point towards ω, `b` decreases at nearly unit rate along
/// h-short arcs: `b(u) - b(z) >= |u - z| - 16δ - 10h`.
pub fn check_cone_lemma(ctx: &Context) -> CheckResult {
    let (s, f) = (ctx.space, &ctx.field);
    let per: Vec<(Worst, f64, bool)> = ctx
        .families
        .par_iter()
        .map(|fam| {
            let mut w = Worst::new();
            let mut snap = 0.0f64;
            if !f.resolves(s, fam.x, fam.y, ctx.delta) {
                return (w, snap, false);
            }
            for arc in &fam.arcs {
                let Some((end, off)) = omega_split(ctx, arc, fam.x, fam.y) else { continue };
                snap = snap.max(2.0 * off);
                let (def, u, z) = cone_deficit(ctx, arc, end, |v| f.value(v));
                w.offer(def, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "u": ctx.id(u), "z": ctx.id(z), "split": ctx.id(arc.vertices()[end]) }));
            }
            (w, snap, true)
        })
        .collect();
    let mut worst = Worst::new();
    let mut snap = 0.0f64;
    let mut resolved = 0;
    for (w, sn, r) in per {
        worst.merge(w);
        snap = snap.max(sn);
        resolved += r as usize;
    }
    let bound = 16.0 * ctx.delta + 10.0 * ctx.h;
    if resolved == 0 {
        return CheckResult::inconclusive("cone_lemma", bound, "no sampled pair is resolved by the ray tail");
    }
    let slack = Slack { snap, anchor: f.anchor_error, ..float_slack(s.diameter()) };
    let witness = with_fields(worst.witness.clone(), json!({ "pairs_resolved": resolved, "pairs_skipped": ctx.families.len() - resolved }));
    CheckResult::measured("cone_lemma", bound, worst.value_or(0.0), slack, witness, None)
}

/// Two-sided constants bounding `l_ε(γ) / (e^{-ε(x|y)_b} min(1/2, ε|x-y|))`
/// for qualifying arcs, as `(lower, upper)`.
pub fn comparison_constants(epsilon: f64, delta: f64, h: f64) -> (f64, f64) {
    let e = epsilon;
    let shift = (e * (16.0 * delta + 12.0 * h)).exp();
    let near_upper = 2.0 * (10.0 * e * delta + 1.0).exp() / e;
    let far_upper = 4.0 * (e * (16.0 * delta + 11.0 * h)).exp() / e;
    let near_lower = (-10.0 * e * delta - 1.0).exp() / e;
    let far_lower = 2.0 * (-(-0.25f64).exp_m1()) * (-10.0 * e * delta).exp() / e;
    (near_lower.min(far_lower) / shift, near_upper.max(far_upper) * shift)
}

/// Deformed lengths of qualifying arcs are comparable to
/// `e^{-ε(x|y)_b} min(1/2, ε|x-y|)`, and `b(y')` tracks `(x|y)_b` within
/// `16δ + 12h`.
pub fn check_comparison(ctx: &Context) -> CheckResult {
    let (s, f, d) = (ctx.space, &ctx.field, &ctx.deformation);
    let eps = ctx.epsilon;
    let per: Vec<(Worst, Worst, f64, bool)> = ctx
        .families
        .par_iter()
        .map(|fam| {
            let (x, y) = (fam.x, fam.y);
            let arc = &fam.arcs[0];
            let dist = s.dist(x, y);
            let target = (-eps * gromov_product_b(s, f, x, y)).exp() * (0.5f64).min(eps * dist);
            let ratio = d.length(arc) / target;
            let mut cw = Worst::new();
            cw.offer(ratio.max(1.0 / ratio), || json!({ "pair": ids(ctx, &[x, y]), "ratio": ratio }));
            let mut bw = Worst::new();
            let mut snap = 0.0;
            let resolved = f.resolves(s, x, y, ctx.delta);
            if resolved {
                if let Some((i, off)) = omega_split(ctx, arc, x, y) {
                    snap = off;
                    let yp = arc.vertices()[i];
                    let dev = (f.value(yp) - gromov_product_b(s, f, x, y)).abs();
                    bw.offer(dev, || json!({ "pair": ids(ctx, &[x, y]), "split": ctx.id(yp) }));
                }
            }
            (cw, bw, snap, resolved)
        })
        .collect();
    let (mut c_emp, mut worst) = (Worst::new(), Worst::new());
    let mut snap = 0.0f64;
    let mut resolved = 0;
    let mut ratio_range = (f64::INFINITY, 0.0f64);
    for (cw, bw, sn, r) in per {
        if let Some(ratio) = cw.witness.get("ratio").and_then(Value::as_f64) {
            ratio_range = (ratio_range.0.min(ratio), ratio_range.1.max(ratio));
        }
        c_emp.merge(cw);
        worst.merge(bw);
        snap = snap.max(sn);
        resolved += r as usize;
    }
    let bound = 16.0 * ctx.delta + 12.0 * ctx.h;
    let (lower, upper) = comparison_constants(eps, ctx.delta, ctx.h);
    let c_theory = upper.max(1.0 / lower);
    let anchor_factor = (eps * f.anchor_error).exp();
    let summary = json!({
        "C_empirical": c_emp.value,
        "C_theory": c_theory,
        "C_empirical_finite": c_emp.value.is_finite(),
        "ratio_min": ratio_range.0,
        "ratio_max": ratio_range.1,
        "ratio_lower_theory": lower / anchor_factor,
        "ratio_upper_theory": upper * anchor_factor,
        "ratio_within_theory": ratio_range.0 >= lower / anchor_factor && ratio_range.1 <= upper * anchor_factor,
        "worst_ratio_pair": c_emp.witness.get("pair").cloned().unwrap_or(Value::Null),
        "pairs_resolved": resolved,
    });
    if !c_emp.value.is_finite() {
        let slack = float_slack(bound);
        return CheckResult::measured("comparison", bound, f64::INFINITY, slack, summary, None);
    }
    if resolved == 0 {
        let mut r = CheckResult::inconclusive("comparison", bound, "no sampled pair is resolved by the ray tail");
        r.witness = with_fields(r.witness, summary);
        return r;
    }
    let slack = Slack { snap, anchor: f.anchor_error, ..float_slack(s.diameter()) };
    CheckResult::measured("comparison", bound, worst.value_or(0.0), slack, with_fields(worst.witness.clone(), summary), None)
}

/// `ρ(z) / (ε e^{10εδ+1})`, a lower bound for the deformed distance from
/// `z` to the boundary.
fn boundary_floor(ctx: &Context, z: Vertex) -> f64 {
    ctx.deformation.density(z) / (ctx.epsilon * (10.0 * ctx.epsilon * ctx.delta + 1.0).exp())
}

/// Qualifying arcs are quasiconvex (`l_ε(γ) <= A d_ε(x, y)`) and satisfy the
/// double cone condition `min(l_ε(γ[x,z]), l_ε(γ[z,y])) <= A δ_ε(z)`.
pub fn check_uniformity(ctx: &Context) -> CheckResult {
    let d = &ctx.deformation;
    let a = ctx.ledger.a_uniform;
    let per: Vec<(Worst, f64, f64, usize)> = ctx
        .families
        .par_iter()
        .map(|fam| {
            let mut w = Worst::new();
            let (mut qc, mut cone) = (0.0f64, 0.0f64);
            let mut shallow = 0;
            let de = d.distance(fam.x, fam.y);
            for arc in &fam.arcs {
                let cum = d.cumulative(arc);
                let total = *cum.last().unwrap();
                let q = total / de;
                qc = qc.max(q);
                w.offer(q, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "arc": ids(ctx, arc.vertices()), "condition": "quasiconvexity" }));
                for (k, &z) in arc.vertices().iter().enumerate() {
                    let floor = boundary_floor(ctx, z);
                    let proxy = ctx.proxy_distance[z];
                    if proxy < floor {
                        shallow += 1;
                    }
                    let side = cum[k].min(total - cum[k]);
                    let r = side / proxy.max(floor);
                    cone = cone.max(r);
                    w.offer(r, || json!({ "pair": ids(ctx, &[fam.x, fam.y]), "z": ctx.id(z), "condition": "double_cone", "boundary_distance": proxy.max(floor) }));
                }
            }
            (w, qc, cone, shallow)
        })
        .collect();
    let mut worst = Worst::new();
    let (mut qc, mut cone, mut shallow) = (0.0f64, 0.0f64, 0);
    for (w, q, c, sh) in per {
        worst.merge(w);
        qc = qc.max(q);
        cone = cone.max(c);
        shallow += sh;
    }
    let witness = with_fields(
        worst.witness.clone(),
        json!({ "A_quasiconvexity": qc, "A_double_cone": cone, "points_below_boundary_floor": shallow }),
    );
    let anchor = a * (ctx.epsilon * ctx.field.anchor_error).exp_m1();
    let slack = Slack { anchor, ..float_slack(a) };
    let reason = (!ctx.ledger.within_epsilon0()).then(|| format!("ε = {} exceeds ε₀ = {}", ctx.epsilon, ctx.ledger.epsilon0));
    CheckResult::measured("uniformity", a, worst.value_or(0.0), slack, witness, reason)
}

/// Proxy boundary distances respect `ρ(x) e^{-10εδ} (1 - e^{-ε D}) / ε`
/// with `D` the distance to the proxy, and the limiting bound
/// `ρ(x) / (ε e^{10εδ+1})` wherever `D > 1/ε`.
pub fn check_boundary_lower_bound(ctx: &Context) -> CheckResult {
    let s = ctx.space;
    let eps = ctx.epsilon;
    let mut worst = Worst::new();
    let (mut deep, mut flagged) = (0usize, 0usize);
    let mut scale = 0.0f64;
    for x in 0..s.len() {
        let depth = s.dist_to_set(x, &ctx.proxy).0;
        let proxy = ctx.proxy_distance[x];
        let finite = ctx.deformation.density(x) * (-10.0 * eps * ctx.delta).exp() * (-(-eps * depth).exp_m1()) / eps;
        let floor = boundary_floor(ctx, x);
        scale = scale.max(finite);
        worst.offer(finite - proxy, || json!({ "vertex": ctx.id(x), "bound": "finite_depth", "proxy_distance": proxy, "depth": depth }));
        if depth > 1.0 / eps {
            deep += 1;
            scale = scale.max(floor);
            worst.offer(floor - proxy, || json!({ "vertex": ctx.id(x), "bound": "limit", "proxy_distance": proxy, "depth": depth }));
        } else if proxy < floor {
            flagged += 1;
        }
    }
    let witness = with_fields(worst.witness.clone(), json!({ "deep_points": deep, "shallow_points_below_limit": flagged }));
    CheckResult::measured("boundary_lower_bound", 0.0, worst.value_or(0.0), float_slack(scale), witness, None)
}

/// Along the tail of ω, `d_ε(o, u_n)` grows and stays above
/// `e^{-ε(δ+h+1)} |o - u_n| / K`.
pub fn check_unboundedness(ctx: &Context) -> CheckResult {
    let (s, d, o) = (ctx.space, &ctx.deformation, ctx.field.o);
    let tail = ctx.field.omega.tail();
    let k = ctx.ledger.k_gh;
    let factor = (-ctx.epsilon * (ctx.delta + ctx.h + 1.0)).exp() / k;
    let mut worst = Worst::new();
    let mut scale = 0.0f64;
    for (i, &u) in tail.iter().enumerate() {
        let de = d.distance(o, u);
        scale = scale.max(de);
        worst.offer(factor * s.dist(o, u) - de, || json!({ "anchor": ctx.id(u), "condition": "growth_floor", "deformed_distance": de }));
        if let Some(&next) = tail.get(i + 1) {
            worst.offer(de - d.distance(o, next), || json!({ "anchor": ctx.id(next), "condition": "increasing" }));
        }
    }
    let reason = (!ctx.ledger.within_epsilon0()).then(|| format!("ε = {} exceeds ε₀ = {}", ctx.epsilon, ctx.ledger.epsilon0));
    CheckResult::measured("unboundedness", 0.0, worst.value_or(0.0), float_slack(scale), worst.witness, reason)
}

/// Tails of `d_ε(u_n, u_m)` over `m > n`, per anchor `n`.
fn tail_sups(ctx: &Context, ray: &BoundaryRay) -> Vec<f64> {
    let a = &ray.anchors;
    (0..a.len() - 1)
        .map(|n| a[n + 1..].iter().map(|&m| ctx.deformation.distance(a[n], m)).fold(0.0, f64::max))
        .collect()
}

/// Whether the tails of two rays converge to the same boundary point.
fn equivalent_rays(ctx: &Context, r1: &BoundaryRay, r2: &BoundaryRay) -> bool {
    let o = ctx.field.o;
    let n = r1.anchors.len().min(r2.anchors.len());
    let head = (n / 4).max(2);
    let at = |i: usize| gromov_product(ctx.space, r1.anchors[i], r2.anchors[i], o);
    let head_max = (0..head).map(at).fold(f64::NEG_INFINITY, f64::max);
    let tail_min = (crate::hyperbolicity::tail_start(n)..n).map(at).fold(f64::INFINITY, f64::min);
    tail_min > head_max + 2.0 * ctx.delta
}

/// Rays other than ω are Cauchy in `d_ε`; equivalent rays approach each
/// other and inequivalent ones stay apart by the comparison lower bound.
pub fn check_boundary_map(ctx: &Context) -> CheckResult {
    let (s, f, d) = (ctx.space, &ctx.field, &ctx.deformation);
    let eps = ctx.epsilon;
    let mut worst = Worst::new();
    let mut scale = 0.0f64;
    let mut rays = Vec::new();
    for ray in &ctx.others {
        let sups = tail_sups(ctx, ray);
        let start = crate::hyperbolicity::tail_start(ray.anchors.len());
        for n in start..sups.len().saturating_sub(1) {
            scale = scale.max(sups[n]);
            worst.offer(sups[n + 1] - sups[n], || json!({ "ray": ray.name, "condition": "cauchy_tail", "anchor": ctx.id(ray.anchors[n + 1]) }));
        }
        rays.push(json!({ "ray": ray.name, "tail_sup_first": sups.get(start).copied(), "tail_sup_last": sups.last().copied() }));
    }
    let (lower, _) = comparison_constants(eps, ctx.delta, ctx.h);
    let coef = lower / ctx.ledger.k_gh * (-eps * f.anchor_error).exp();
    let mut pairs = Vec::new();
    for (i, r1) in ctx.others.iter().enumerate() {
        for r2 in &ctx.others[i + 1..] {
            let n = r1.anchors.len().min(r2.anchors.len());
            let tail = crate::hyperbolicity::tail_start(n)..n;
            if equivalent_rays(ctx, r1, r2) {
                for k in tail.start..n - 1 {
                    let (a, b) = (d.distance(r1.anchors[k], r2.anchors[k]), d.distance(r1.anchors[k + 1], r2.anchors[k + 1]));
                    scale = scale.max(a);
                    worst.offer(b - a, || json!({ "rays": [r1.name, r2.name], "condition": "equivalent_converge", "index": k + 1 }));
                }
                pairs.push(json!({ "rays": [r1.name, r2.name], "equivalent": true }));
            } else {
                let mut separation = f64::INFINITY;
                let mut margin_floor = f64::INFINITY;
                for k in tail {
                    let (u, v) = (r1.anchors[k], r2.anchors[k]);
                    let de = d.distance(u, v);
                    let margin = coef * (-eps * gromov_product_b(s, f, u, v)).exp() * (0.5f64).min(eps * s.dist(u, v));
                    separation = separation.min(de);
                    margin_floor = margin_floor.min(margin);
                    scale = scale.max(de);
                    worst.offer(margin - de, || json!({ "rays": [r1.name, r2.name], "condition": "separated", "index": k, "deformed_distance": de, "margin": margin }));
                }
                // a vanishing margin would leave the separation unproven
                worst.offer(if margin_floor > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY }, || {
                    json!({ "rays": [r1.name, r2.name], "condition": "positive_margin" })
                });
                pairs.push(json!({ "rays": [r1.name, r2.name], "equivalent": false, "separation": separation, "margin": margin_floor }));
            }
        }
    }
    let witness = with_fields(worst.witness.clone(), json!({ "rays": rays, "pairs": pairs }));
    let reason = (!ctx.ledger.within_epsilon0() && !pairs.is_empty())
        .then(|| format!("ε = {} exceeds ε₀ = {}", eps, ctx.ledger.epsilon0));
    CheckResult::measured("boundary_map", 0.0, worst.value_or(0.0), float_slack(scale), witness, reason)
}
