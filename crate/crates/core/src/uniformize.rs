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

//! Conformal deformation by `ρ_ε = e^{-εb}` and the constants that govern it.

use serde::Serialize;

use crate::busemann::BusemannField;
use crate::error::{Error, Result};
use crate::space::{FiniteMetricSpace, PathArc, Vertex};

/// Largest admissible slack in the arc family used by the Gehring-Hayman
/// estimate (`h < 1/13`).
pub const H_LIMIT: f64 = 1.0 / 13.0;

/// `ρ_ε(x) = e^{-ε b(x)}`.
pub fn density(field: &BusemannField, epsilon: f64, x: Vertex) -> f64 {
    (-epsilon * field.b[x]).exp()
}

/// `∫ e^{-εb}` over an edge of length `len` with `b` linear from `bu` to `bv`.
///
/// The result is clamped into `[len·min ρ, len·max ρ]` to absorb rounding.
pub fn edge_integral(epsilon: f64, bu: f64, bv: f64, len: f64) -> f64 {
    let rho_u = (-epsilon * bu).exp();
    let rho_v = (-epsilon * bv).exp();
    let delta = bv - bu;
    let w = if delta == 0.0 {
        len * rho_u
    } else {
        let t = epsilon * delta;
        len * rho_u * (-(-t).exp_m1() / t)
    };
    w.clamp(len * rho_u.min(rho_v), len * rho_u.max(rho_v))
}

pub fn deformed_edge_length(space: &FiniteMetricSpace, field: &BusemannField, epsilon: f64, u: Vertex, v: Vertex) -> Option<f64> {
    space.edge_length(u, v).map(|len| edge_integral(epsilon, field.b[u], field.b[v], len))
}

/// The space with every edge reweighted by its `ρ_ε` integral.
#[derive(Debug, Clone)]
pub struct ConformalDeformation {
    pub field: BusemannField,
    pub epsilon: f64,
    /// Deformed lengths in the base space's canonical edge order.
    pub edge_weights: Vec<f64>,
    deformed: FiniteMetricSpace,
}

impl ConformalDeformation {
    pub fn new(space: &FiniteMetricSpace, field: &BusemannField, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::BadEpsilon(epsilon));
        }
        let edge_weights: Vec<f64> =
            space.edges().iter().map(|e| edge_integral(epsilon, field.b[e.u], field.b[e.v], e.length)).collect();
        let deformed = space.reweighted(&edge_weights)?;
        Ok(Self { field: field.clone(), epsilon, edge_weights, deformed })
    }

    /// The reweighted graph with its metric `d_ε`.
    pub fn space(&self) -> &FiniteMetricSpace {
        &self.deformed
    }

    pub fn density(&self, x: Vertex) -> f64 {
        density(&self.field, self.epsilon, x)
    }

    /// `d_ε(x, y)`.
    pub fn distance(&self, x: Vertex, y: Vertex) -> f64 {
        self.deformed.dist(x, y)
    }

    /// `l_ε(arc)`, the sum of deformed edge lengths along the arc.
    pub fn length(&self, arc: &PathArc) -> f64 {
        arc.vertices().windows(2).map(|w| self.deformed.edge_length(w[0], w[1]).unwrap()).sum()
    }

    /// Deformed arclength from the start of `arc` to each of its vertices.
    pub fn cumulative(&self, arc: &PathArc) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(arc.len());
        out.push(0.0);
        for w in arc.vertices().windows(2) {
            acc += self.deformed.edge_length(w[0], w[1]).unwrap();
            out.push(acc);
        }
        out
    }

    /// `min` over proxy vertices `v` of `d_ε(z, v)`.
    pub fn boundary_proxy_distance(&self, z: Vertex, proxy_sets: &[Vec<Vertex>]) -> Result<f64> {
        if proxy_sets.is_empty() || proxy_sets.iter().any(|s| s.is_empty()) {
            return Err(Error::EmptyProxy);
        }
        Ok(proxy_sets.iter().flatten().map(|&v| self.deformed.dist(z, v)).fold(f64::INFINITY, f64::min))
    }
}

pub fn deformed_distance(deformation: &ConformalDeformation, x: Vertex, y: Vertex) -> f64 {
    deformation.distance(x, y)
}

pub fn deformed_length(deformation: &ConformalDeformation, arc: &PathArc) -> f64 {
    deformation.length(arc)
}

pub fn boundary_proxy_distance(deformation: &ConformalDeformation, z: Vertex, proxy_sets: &[Vec<Vertex>]) -> Result<f64> {
    deformation.boundary_proxy_distance(z, proxy_sets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    Explicit,
    Auto,
}

/// Constants derived from `(δ, κ, h, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsLedger {
    pub delta: f64,
    pub kappa: f64,
    pub h: f64,
    /// The ε the deformation is built with.
    pub epsilon: f64,
    pub epsilon_mode: EpsilonMode,
    /// Harnack constant `e^{10εδ}`.
    pub lambda: f64,
    /// Chord-arc multiplier `6λ²`.
    #[serde(rename = "M")]
    pub m: f64,
    /// Chord-arc additive constant.
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "R")]
    pub r_outer: f64,
    #[serde(rename = "r")]
    pub r_inner: f64,
    #[serde(rename = "A")]
    pub a: f64,
    /// Neighbourhood radius `2M(A+1)+1`.
    #[serde(rename = "L")]
    pub l: f64,
    /// `1/(25λ²L)`; deformations with `ε <= epsilon0` are covered by the
    /// Gehring-Hayman estimate.
    pub epsilon0: f64,
    /// Gehring-Hayman constant `18λ²`.
    #[serde(rename = "K_gh")]
    pub k_gh: f64,
    /// Uniformity constant `max(K_gh, e^{ε(26δ+11h)+1})`.
    #[serde(rename = "A_uniform")]
    pub a_uniform: f64,
    /// Scale `1/(24λ²ε)` below which long arcs lose to short ones.
    pub short_scale: f64,
}

struct Chain {
    lambda: f64,
    m: f64,
    r_outer: f64,
    r_inner: f64,
    a: f64,
    l: f64,
    epsilon0: f64,
}

fn chain(delta: f64, kappa: f64, h: f64, epsilon: f64) -> Option<Chain> {
    let lambda = (10.0 * epsilon * delta).exp();
    let m = 6.0 * lambda * lambda;
    let c = 1.0;
    let r_outer = 1.0 + 4.0 * kappa + 4.0 * kappa * m + 2.0 * h;
    let r_inner = r_outer - 2.0 * kappa - 2.0 * h;
    let denom = 1.0 - h - 2.0 * h * m;
    if denom.is_nan() || denom <= 0.0 || !lambda.is_finite() {
        return None;
    }
    let a = ((2.0 * r_outer + 8.0 * kappa + 2.0 * h) * (2.0 + 8.0 * kappa * m - h) + (8.0 * kappa + 2.0 * h) * c) / denom;
    let l = 2.0 * m * (a + 1.0) + 1.0;
    let epsilon0 = 1.0 / (25.0 * lambda * lambda * l);
    Some(Chain { lambda, m, r_outer, r_inner, a, l, epsilon0 })
}

/// `ε · 25λ(ε)² L(ε)`, infinite where the chain is undefined.
fn admissibility(delta: f64, kappa: f64, h: f64, epsilon: f64) -> f64 {
    chain(delta, kappa, h, epsilon).map_or(f64::INFINITY, |c| epsilon / c.epsilon0)
}

/// Largest `ε` in `(0, 1]` with `ε·25λ(ε)²L(ε) <= 1`, by bisection.
fn solve_epsilon(delta: f64, kappa: f64, h: f64) -> Result<f64> {
    if admissibility(delta, kappa, h, 1.0) <= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if admissibility(delta, kappa, h, mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Ok(lo)
    } else {
        Err(Error::BisectionFailed(format!(
            "δ = {delta}, κ = {kappa}, h = {h}: condition fails at ε = {hi:e}"
        )))
    }
}

/// Builds the constants ledger. With `epsilon` absent the deformation
/// parameter is the largest admissible one.
pub fn constants_ledger(delta: f64, kappa: f64, h: f64, epsilon: Option<f64>) -> Result<ConstantsLedger> {
    if !(h.is_finite() && (0.0..H_LIMIT).contains(&h)) {
        return Err(Error::HOutOfRange(h));
    }
    let (eps, mode) = match epsilon {
        Some(e) if e.is_finite() && e > 0.0 => (e, EpsilonMode::Explicit),
        Some(e) => return Err(Error::BadEpsilon(e)),
        None => {
            let lo = solve_epsilon(delta, kappa, h)?;
            let e0 = chain(delta, kappa, h, lo).expect("admissible ε has a defined chain").epsilon0;
            // ε₀ computed at the bracket is usable whenever it is itself admissible
            let eps = if admissibility(delta, kappa, h, e0) <= 1.0 + 1e-12 { e0 } else { lo };
            (eps, EpsilonMode::Auto)
        }
    };
    let ch = chain(delta, kappa, h, eps).ok_or_else(|| {
        Error::LedgerUndefined(format!("1 - h - 2hM <= 0 at ε = {eps}, h = {h}"))
    })?;
    let k_gh = 18.0 * ch.lambda * ch.lambda;
    Ok(ConstantsLedger {
        delta,
        kappa,
        h,
        epsilon: eps,
        epsilon_mode: mode,
        lambda: ch.lambda,
        m: ch.m,
        c: 1.0,
        r_outer: ch.r_outer,
        r_inner: ch.r_inner,
        a: ch.a,
        l: ch.l,
        epsilon0: ch.epsilon0,
        k_gh,
        a_uniform: k_gh.max((eps * (26.0 * delta + 11.0 * h) + 1.0).exp()),
        short_scale: 1.0 / (24.0 * ch.lambda * ch.lambda * eps),
    })
}

impl ConstantsLedger {
    /// Whether the working ε lies within the Gehring-Hayman range.
    pub fn within_epsilon0(&self) -> bool {
        self.epsilon <= self.epsilon0 * (1.0 + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::busemann::{busemann_field, BoundaryRay};

    #[test]
    fn edge_integral_examples() {
        assert_eq!(edge_integral(1.0, 0.0, 0.0, 1.0), 1.0);
        assert!((edge_integral(1.0, 0.0, -1.0, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((edge_integral(1e-8, 0.0, -1.0, 2.0) - 2.0).abs() < 1e-6);
        // symmetric in orientation
        let a = edge_integral(0.3, 1.2, -0.4, 0.7);
        let b = edge_integral(0.3, -0.4, 1.2, 0.7);
        assert!((a - b).abs() <= 1e-15 * a);
    }

    #[test]
    fn ledger_at_zero() {
        let l = constants_ledger(0.0, 0.0, 0.0, Some(0.01)).unwrap();
        assert_eq!((l.lambda, l.m, l.c, l.r_outer, l.r_inner), (1.0, 6.0, 1.0, 1.0, 1.0));
        assert_eq!((l.a, l.l, l.k_gh), (4.0, 61.0, 18.0));
        assert_eq!(l.epsilon0, 1.0 / 1525.0);
        let auto = constants_ledger(0.0, 0.0, 0.0, None).unwrap();
        assert_eq!(auto.epsilon, 1.0 / 1525.0);
        assert_eq!(auto.epsilon_mode, EpsilonMode::Auto);
    }

    #[test]
    fn ledger_with_slack() {
        let h = 1.0 / 14.0;
        let l = constants_ledger(0.0, 1.5 * h, h, None).unwrap();
        assert!((l.r_outer - 4.142857142857143).abs() < 1e-12);
        assert!((l.a - 933.2857142857133).abs() < 1e-9);
        assert!((l.l - 11212.42857142856).abs() < 1e-8);
        assert!((l.epsilon0 - 3.5674697720641676e-06).abs() < 1e-18);
        assert!(constants_ledger(0.0, 0.0, 1.0 / 13.0, None).is_err());
        assert!(constants_ledger(0.0, 0.0, 0.0, Some(-1.0)).is_err());
    }

    #[test]
    fn auto_epsilon_is_admissible_with_positive_delta() {
        let l = constants_ledger(1.0, 3.0 + 1.5 / 14.0, 1.0 / 14.0, None).unwrap();
        assert!(l.within_epsilon0());
        assert!(l.epsilon > 0.0);
        assert_eq!(l.lambda, (10.0 * l.epsilon * 1.0f64).exp());
    }

    #[test]
    fn path_deformation_closed_form() {
        let n = 10i64;
        let edges: Vec<_> = (-n..n).map(|i| (i.to_string(), (i + 1).to_string(), 1.0)).collect();
        let s = FiniteMetricSpace::new((-n..=n).map(|i| i.to_string()).collect(), &edges).unwrap();
        let v = |i: i64| s.vertex(&i.to_string()).unwrap();
        let ray = BoundaryRay::new("pos", (1..=n).map(v).collect());
        let f = busemann_field(&s, &ray, v(0)).unwrap();
        let d = ConformalDeformation::new(&s, &f, 1.0).unwrap();
        assert!((d.density(v(1)) - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(d.density(v(0)), 1.0);
        assert!((d.distance(v(0), v(1)) - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert_eq!(d.distance(v(3), v(3)), 0.0);
        let proxy = vec![vec![v(-n)]];
        let want = -(-(n as f64)).exp_m1();
        assert!((d.boundary_proxy_distance(v(0), &proxy).unwrap() - want).abs() < 1e-14);
        assert_eq!(d.boundary_proxy_distance(v(-n), &proxy).unwrap(), 0.0);
        assert!(d.boundary_proxy_distance(v(0), &[]).is_err());
        assert!(d.boundary_proxy_distance(v(0), &[vec![]]).is_err());
        let arc = crate::space::shortest_arc(&s, v(-2), v(2));
        assert!((d.length(&arc) - d.distance(v(-2), v(2))).abs() < 1e-14);
    }
}
