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

//! Machine checks of the quantitative inequalities behind the uniformization,
//! each reported with its theoretical bound, the worst empirical value and a
//! witness.

mod checks;

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::{json, Value};

pub use checks::*;

use crate::busemann::{busemann_field, validate_ray, BusemannField, RayDiagnostics};
use crate::error::{Error, Result};
use crate::hyperbolicity::{delta_four_point, rips_kappa, HyperbolicityEstimate, Method, EXACT_DELTA_CUTOFF};
use crate::io::Instance;
use crate::sampling::{sample_pairs, DEFAULT_PAIR_BUDGET};
use crate::space::{h_short_arcs, FiniteMetricSpace, PathArc, Vertex, DEFAULT_MAX_ARCS};
use crate::uniformize::{constants_ledger, ConformalDeformation, ConstantsLedger, H_LIMIT};

/// Relative tolerance for floating-point rounding in every comparison.
pub const FLOAT_TOL: f64 = 1e-9;

/// Quadruples sampled when δ is not computed exactly.
pub const DEFAULT_DELTA_SAMPLES: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "true",
            Verdict::Fail => "false",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Verdict::Pass => s.serialize_bool(true),
            Verdict::Fail => s.serialize_bool(false),
            Verdict::Inconclusive => s.serialize_str("inconclusive"),
        }
    }
}

/// Additive slack folded into a comparison, by source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Slack {
    /// From snapping points on arcs to vertices.
    pub snap: f64,
    /// From building the Busemann field out of a finite ray.
    pub anchor: f64,
    /// Floating-point rounding.
    pub float: f64,
}

impl Slack {
    pub fn total(&self) -> f64 {
        self.snap + self.anchor + self.float
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub holds: Verdict,
    pub theory_bound: f64,
    pub empirical_worst: f64,
    pub witness: Value,
    pub slack_used: f64,
}

impl CheckResult {
    /// Pass iff `worst <= bound + slack`, unless `inconclusive` names a reason.
    pub fn measured(name: &str, bound: f64, worst: f64, slack: Slack, witness: Value, inconclusive: Option<String>) -> Self {
        let mut witness = witness;
        if let Value::Object(map) = &mut witness {
            map.insert("slack".into(), serde_json::to_value(slack).unwrap());
            if let Some(reason) = &inconclusive {
                map.insert("inconclusive_reason".into(), Value::String(reason.clone()));
                map.insert("measured_holds".into(), Value::Bool(worst <= bound + slack.total()));
            }
        }
        let holds = if inconclusive.is_some() {
            Verdict::Inconclusive
        } else if worst <= bound + slack.total() {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self { name: name.to_string(), holds, theory_bound: bound, empirical_worst: worst, witness, slack_used: slack.total() }
    }

    pub fn inconclusive(name: &str, bound: f64, reason: impl Into<String>) -> Self {
        let reason = reason.into();
        Self {
            name: name.to_string(),
            holds: Verdict::Inconclusive,
            theory_bound: bound,
            empirical_worst: 0.0,
            witness: json!({ "inconclusive_reason": reason }),
            slack_used: 0.0,
        }
    }

    /// Recomputes the verdict from the reported numbers.
    pub fn recheck(&self) -> bool {
        self.empirical_worst <= self.theory_bound + self.slack_used
    }
}

/// Check names in the order [`run_suite`] runs them.
pub const CHECK_ORDER: &[&str] = &[
    "harnack",
    "product_decomposition",
    "local_bilipschitz",
    "rips_slimness",
    "tripod",
    "projection",
    "gehring_hayman",
    "long_arc_exchange",
    "neighborhood_containment",
    "point_cone",
    "cone_lemma",
    "comparison",
    "uniformity",
    "boundary_lower_bound",
    "unboundedness",
    "boundary_map",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMode {
    /// Exact up to the cutoff, sampled beyond.
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Ray standing for ω; the first ray of the document when absent.
    pub ray: Option<String>,
    /// Overrides the document basepoint.
    pub basepoint: Option<String>,
    pub h: f64,
    /// Explicit ε; the largest admissible ε when absent.
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub pair_budget: usize,
    pub max_arcs: usize,
    pub delta_mode: DeltaMode,
    pub delta_samples: u64,
    /// Subset of [`CHECK_ORDER`]; all when absent.
    pub checks: Option<Vec<String>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            ray: None,
            basepoint: None,
            h: 1.0 / 14.0,
            epsilon: None,
            seed: 0,
            pair_budget: DEFAULT_PAIR_BUDGET,
            max_arcs: DEFAULT_MAX_ARCS,
            delta_mode: DeltaMode::Auto,
            delta_samples: DEFAULT_DELTA_SAMPLES,
            checks: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub vertices: usize,
    pub edges: usize,
    pub diameter: f64,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub basepoint: String,
    pub omega: String,
    pub rays: Vec<RayDiagnostics>,
    /// Vertices standing in for the boundary away from ω.
    pub boundary_proxy: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub space: SpaceSummary,
    pub delta: f64,
    pub delta_method: Method,
    pub quadruples_checked: u64,
    pub kappa: f64,
    pub h: f64,
    pub epsilon: f64,
    pub anchor_error: f64,
    pub ledger: ConstantsLedger,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.holds == Verdict::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Arcs from the qualifying family of one ordered pair.
#[derive(Debug, Clone)]
pub struct PairFamily {
    pub x: Vertex,
    pub y: Vertex,
    /// h-short arcs with `l <= 2|x - y|`, shortest first.
    pub arcs: Vec<PathArc>,
}

/// Everything the checks share.
pub struct Context<'a> {
    pub space: &'a FiniteMetricSpace,
    pub field: BusemannField,
    pub deformation: ConformalDeformation,
    pub ledger: ConstantsLedger,
    pub delta: f64,
    pub kappa: f64,
    pub h: f64,
    pub epsilon: f64,
    pub families: Vec<PairFamily>,
    /// Rays other than ω, in document order.
    pub others: Vec<crate::busemann::BoundaryRay>,
    pub proxy: Vec<Vertex>,
    /// `min` over proxy vertices of `d_ε(z, ·)`, per vertex.
    pub proxy_distance: Vec<f64>,
    pub seed: u64,
    pub max_arcs: usize,
}

impl Context<'_> {
    pub fn id(&self, v: Vertex) -> &str {
        self.space.id(v)
    }

    pub fn proxy_sets(&self) -> Vec<Vec<Vertex>> {
        vec![self.proxy.clone()]
    }
}

/// Qualifying arc families (h-short, `l <= 2|x - y|`) for the given pairs.
pub fn pair_families(space: &FiniteMetricSpace, pairs: &[(Vertex, Vertex)], h: f64, max_arcs: usize) -> Vec<PairFamily> {
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(|&(x, y)| PairFamily { x, y, arcs: h_short_arcs(space, x, y, h, 2.0 * space.dist(x, y), max_arcs) })
        .collect()
}

/// Vertices with no neighbour farther from `o`, except the final anchor of ω.
pub fn boundary_proxy(space: &FiniteMetricSpace, o: Vertex, omega_end: Vertex) -> Vec<Vertex> {
    (0..space.len())
        .filter(|&v| v != omega_end && v != o)
        .filter(|&v| space.neighbors(v).iter().all(|&(w, _)| space.dist(o, w) <= space.dist(o, v)))
        .collect()
}

fn resolve_checks(config: &VerifyConfig) -> Result<Vec<&'static str>> {
    match &config.checks {
        None => Ok(CHECK_ORDER.to_vec()),
        Some(names) => {
            for n in names {
                if !CHECK_ORDER.contains(&n.as_str()) {
                    return Err(Error::Config(format!("unknown check \"{n}\"; known: {}", CHECK_ORDER.join(", "))));
                }
            }
            Ok(CHECK_ORDER.iter().copied().filter(|c| names.iter().any(|n| n == c)).collect())
        }
    }
}

/// Runs every enabled check in [`CHECK_ORDER`]. Configuration problems are
/// reported before any check runs.
pub fn run_suite(instance: &Instance, config: &VerifyConfig) -> Result<VerificationReport> {
    let enabled = resolve_checks(config)?;
    if !(config.h.is_finite() && (0.0..H_LIMIT).contains(&config.h)) {
        return Err(Error::HOutOfRange(config.h));
    }
    let space = &instance.space;
    let omega = match &config.ray {
        Some(name) => instance.ray(name).ok_or_else(|| Error::Config(format!("no ray named \"{name}\"")))?,
        None => instance.rays.first().ok_or_else(|| Error::Config("the space designates no rays".into()))?,
    };
    let o = match &config.basepoint {
        Some(id) => space.vertex(id).map_err(|_| Error::Config(format!("unknown basepoint \"{id}\"")))?,
        None => instance.basepoint,
    };
    let others: Vec<_> = instance.rays.iter().filter(|r| r.name != omega.name).cloned().collect();
    if enabled.contains(&"boundary_map") && others.is_empty() {
        return Err(Error::Config("the boundary map check needs a ray other than ω".into()));
    }
    let mut diagnostics = Vec::with_capacity(instance.rays.len());
    for ray in &instance.rays {
        diagnostics.push(validate_ray(space, ray, o)?);
    }
    for (ray, diag) in instance.rays.iter().zip(&diagnostics) {
        if !diag.valid {
            return Err(Error::InvalidRay { name: ray.name.clone(), reason: diag.reason.clone().unwrap_or_default() });
        }
    }
    let field = busemann_field(space, omega, o)?;
    let proxy = boundary_proxy(space, o, omega.last());
    if proxy.is_empty() {
        return Err(Error::EmptyProxy);
    }

    let method = match config.delta_mode {
        DeltaMode::Exact => Method::Exact,
        DeltaMode::Sampled => Method::Sampled,
        DeltaMode::Auto if space.len() <= EXACT_DELTA_CUTOFF => Method::Exact,
        DeltaMode::Auto => Method::Sampled,
    };
    let est: HyperbolicityEstimate = delta_four_point(space, method, config.delta_samples, config.seed);
    let delta = est.delta;
    let kappa = rips_kappa(delta, config.h);
    let ledger = constants_ledger(delta, kappa, config.h, config.epsilon)?;
    let deformation = ConformalDeformation::new(space, &field, ledger.epsilon)?;
    let d = deformation.space();
    let proxy_distance =
        (0..space.len()).map(|z| proxy.iter().map(|&v| d.dist(z, v)).fold(f64::INFINITY, f64::min)).collect();
    let pairs = sample_pairs(space.len(), config.pair_budget, config.seed);
    let families = pair_families(space, &pairs, config.h, config.max_arcs);

    let ctx = Context {
        space,
        field,
        deformation,
        epsilon: ledger.epsilon,
        ledger,
        delta,
        kappa,
        h: config.h,
        families,
        others,
        proxy,
        proxy_distance,
        seed: config.seed,
        max_arcs: config.max_arcs,
    };
    let checks = enabled.iter().map(|name| run_check(&ctx, name)).collect();

    Ok(VerificationReport {
        space: SpaceSummary {
            vertices: space.len(),
            edges: space.edges().len(),
            diameter: space.diameter(),
            min_edge_length: space.min_edge_length(),
            max_edge_length: space.max_edge_length(),
            basepoint: space.id(o).to_string(),
            omega: omega.name.clone(),
            rays: diagnostics,
            boundary_proxy: ctx.proxy.iter().map(|&v| space.id(v).to_string()).collect(),
        },
        delta,
        delta_method: est.method,
        quadruples_checked: est.quadruples_checked,
        kappa,
        h: config.h,
        epsilon: ctx.epsilon,
        anchor_error: ctx.field.anchor_error,
        ledger: ctx.ledger.clone(),
        checks,
    })
}

fn run_check(ctx: &Context, name: &str) -> CheckResult {
    match name {
        "harnack" => check_harnack_pairs(ctx),
        "product_decomposition" => check_product_decomposition(ctx),
        "local_bilipschitz" => check_local_bilipschitz(ctx),
        "rips_slimness" => check_rips_slimness(ctx),
        "tripod" => check_tripod(ctx),
        "projection" => check_projection(ctx),
        "gehring_hayman" => check_gehring_hayman(ctx),
        "long_arc_exchange" => check_long_arc_exchange(ctx),
        "neighborhood_containment" => check_neighborhood_containment(ctx),
        "point_cone" => check_point_cone(ctx),
        "cone_lemma" => check_cone_lemma(ctx),
        "comparison" => check_comparison(ctx),
        "uniformity" => check_uniformity(ctx),
        "boundary_lower_bound" => check_boundary_lower_bound(ctx),
        "unboundedness" => check_unboundedness(ctx),
        "boundary_map" => check_boundary_map(ctx),
        _ => unreachable!("names are validated before the suite runs"),
    }
}
