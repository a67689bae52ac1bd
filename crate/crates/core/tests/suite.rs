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

//! The verification suite end to end on small instances.

use hypunif::generate::{bary_tree, path};
use hypunif::io::{to_json_string, Instance};
use hypunif::space::h_short_arcs;
use hypunif::verify::{run_suite, Verdict, VerifyConfig};
use hypunif::{Error, SpaceDocument};
use indexmap::IndexMap;

fn instance(doc: SpaceDocument) -> Instance {
    Instance::from_document(doc).unwrap()
}

/// Adds a unit path of `len` vertices hanging off `at`, returning its ids.
fn hang(doc: &mut SpaceDocument, at: &str, prefix: &str, len: usize) -> Vec<String> {
    let ids: Vec<String> = (1..=len).map(|k| format!("{prefix}{k}")).collect();
    let mut prev = at.to_string();
    for id in &ids {
        doc.vertices.push(id.clone());
        doc.edges.push((prev.clone(), id.clone(), 1.0));
        prev = id.clone();
    }
    ids
}

/// Unit 4-cycle a-b-c-d with rays hanging off a and c.
fn cycle_with_rays() -> SpaceDocument {
    let v = |s: &str| s.to_string();
    let mut doc = SpaceDocument {
        vertices: ["a", "b", "c", "d"].map(v).to_vec(),
        edges: [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")].iter().map(|&(x, y)| (v(x), v(y), 1.0)).collect(),
        basepoint: v("a"),
        rays: IndexMap::new(),
    };
    let t = hang(&mut doc, "a", "t", 12);
    let s = hang(&mut doc, "c", "s", 12);
    doc.rays.insert("toward_t".into(), t);
    doc.rays.insert("toward_s".into(), s);
    doc
}

const ORACLE_GATE: [&str; 8] =
    ["harnack", "cone_lemma", "point_cone", "gehring_hayman", "comparison", "uniformity", "boundary_lower_bound", "boundary_map"];

#[test]
fn oracle_families_pass_without_snapping() {
    for doc in [path(100).unwrap(), bary_tree(2, 8).unwrap()] {
        let report = run_suite(&instance(doc), &VerifyConfig::default()).unwrap();
        assert_eq!(report.epsilon, report.ledger.epsilon0);
        for c in &report.checks {
            assert_ne!(c.holds, Verdict::Fail, "{} failed: {}", c.name, c.witness);
            assert!(c.recheck(), "{}", c.name);
            let snap = c.witness["slack"]["snap"].as_f64().unwrap_or(0.0);
            assert_eq!(snap, 0.0, "{}", c.name);
        }
        for name in ORACLE_GATE {
            assert_eq!(report.check(name).unwrap().holds, Verdict::Pass, "{name}");
        }
        assert_eq!(report.check("long_arc_exchange").unwrap().holds, Verdict::Inconclusive);
    }
}

#[test]
fn gehring_hayman_on_cycle_matches_enumeration() {
    let inst = instance(cycle_with_rays());
    let config = VerifyConfig { ray: Some("toward_t".into()), ..VerifyConfig::default() };
    let report = run_suite(&inst, &config).unwrap();
    let gh = report.check("gehring_hayman").unwrap();
    assert_eq!(gh.holds, Verdict::Pass);
    assert!(gh.empirical_worst <= report.ledger.k_gh);

    // oracle: b from the far end of the ray, exact edge integrals, Floyd-Warshall
    let s = &inst.space;
    let eps = report.epsilon;
    let (o, end) = (inst.basepoint, *inst.ray("toward_t").unwrap().anchors.last().unwrap());
    let b: Vec<f64> = (0..s.len()).map(|x| s.dist(end, x) - s.dist(end, o)).collect();
    let w = |u: usize, v: usize| {
        let (bu, bv) = (b[u], b[v]);
        if bu == bv {
            (-eps * bu).exp()
        } else {
            (-eps * bu).exp() * -(-eps * (bv - bu)).exp_m1() / (eps * (bv - bu))
        }
    };
    let n = s.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for x in 0..n {
        d[x][x] = 0.0;
        for &(y, _) in s.neighbors(x) {
            d[x][y] = w(x, y);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            for arc in h_short_arcs(s, x, y, config.h, f64::INFINITY, 64) {
                let le: f64 = arc.vertices().windows(2).map(|e| w(e[0], e[1])).sum();
                worst = worst.max(le / d[x][y]);
            }
        }
    }
    assert!(worst > 1.0, "the two routes around the cycle differ in deformed length");
    assert!((gh.empirical_worst - worst).abs() <= 1e-12 * worst, "{} vs {worst}", gh.empirical_worst);
}

#[test]
fn long_arc_exchange_on_detour() {
    // path with a detour of eight unit edges parallel to the edge 0-1
    let mut doc = path(20).unwrap();
    let detour = hang(&mut doc, "0", "w", 7);
    doc.edges.push((detour.last().unwrap().clone(), "1".into(), 1.0));
    let report = run_suite(&instance(doc), &VerifyConfig::default()).unwrap();
    let c = report.check("long_arc_exchange").unwrap();
    assert_eq!(c.holds, Verdict::Pass, "{}", c.witness);
    assert!(c.witness["long_arcs"].as_u64().unwrap() > 0);
    for name in ORACLE_GATE {
        assert_ne!(report.check(name).unwrap().holds, Verdict::Fail, "{name}");
    }
}

#[test]
fn reports_are_deterministic() {
    let inst = instance(bary_tree(2, 8).unwrap());
    let config = VerifyConfig { seed: 7, pair_budget: 300, ..VerifyConfig::default() };
    let a = to_json_string(&run_suite(&inst, &config).unwrap()).unwrap();
    let b = to_json_string(&run_suite(&inst, &config).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn large_epsilon_is_measured_but_inconclusive() {
    let inst = instance(path(30).unwrap());
    let config = VerifyConfig { epsilon: Some(0.5), ..VerifyConfig::default() };
    let report = run_suite(&inst, &config).unwrap();
    let gh = report.check("gehring_hayman").unwrap();
    assert_eq!(gh.holds, Verdict::Inconclusive);
    assert_eq!(gh.witness["measured_holds"], true);
    assert!((gh.empirical_worst - 1.0).abs() < 1e-12);
}

#[test]
fn selected_checks_keep_suite_order() {
    let inst = instance(path(20).unwrap());
    let config = VerifyConfig { checks: Some(vec!["uniformity".into(), "harnack".into()]), ..VerifyConfig::default() };
    let names: Vec<_> = run_suite(&inst, &config).unwrap().checks.into_iter().map(|c| c.name).collect();
    assert_eq!(names, ["harnack", "uniformity"]);
}

#[test]
fn configuration_errors_come_first() {
    let inst = instance(path(20).unwrap());
    let with = |c: VerifyConfig| run_suite(&inst, &c).unwrap_err();
    assert!(matches!(with(VerifyConfig { h: 1.0 / 13.0, ..VerifyConfig::default() }), Error::HOutOfRange(_)));
    assert!(matches!(with(VerifyConfig { ray: Some("nope".into()), ..VerifyConfig::default() }), Error::Config(_)));
    assert!(matches!(with(VerifyConfig { basepoint: Some("nope".into()), ..VerifyConfig::default() }), Error::Config(_)));
    assert!(matches!(with(VerifyConfig { checks: Some(vec!["nope".into()]), ..VerifyConfig::default() }), Error::Config(_)));
    let mut doc = path(20).unwrap();
    doc.rays.shift_remove("neg");
    let lone = instance(doc);
    assert!(matches!(run_suite(&lone, &VerifyConfig::default()).unwrap_err(), Error::Config(_)));
    let config = VerifyConfig { checks: Some(vec!["harnack".into()]), ..VerifyConfig::default() };
    assert!(run_suite(&lone, &config).is_ok());
}
