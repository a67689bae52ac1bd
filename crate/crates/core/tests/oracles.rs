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

//! Closed-form oracles for distances, products, δ and the deformed metric.
//! Expected values are computed here independently of the library.

use hypunif::busemann::busemann_field;
use hypunif::generate::{bary_tree, path, tessellation_disk};
use hypunif::hyperbolicity::{delta_exact, gromov_product};
use hypunif::io::Instance;
use hypunif::uniformize::{constants_ledger, ConformalDeformation};
use hypunif::{build_space, FiniteMetricSpace, PathArc};

fn instance(doc: hypunif::SpaceDocument) -> Instance {
    Instance::from_document(doc).unwrap()
}

fn deformation(inst: &Instance, ray: &str, eps: f64) -> ConformalDeformation {
    let field = busemann_field(&inst.space, inst.ray(ray).unwrap(), inst.basepoint).unwrap();
    ConformalDeformation::new(&inst.space, &field, eps).unwrap()
}

/// `|e^{εx} - e^{εy}| / ε` without cancellation.
fn path_deformed(eps: f64, x: f64, y: f64) -> f64 {
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    (eps * lo).exp() * (eps * (hi - lo)).exp_m1() / eps
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn path_deformed_distance_closed_form() {
    let inst = instance(path(200).unwrap());
    let eps0 = constants_ledger(0.0, 0.0, 0.0, None).unwrap().epsilon;
    for eps in [0.05, eps0, 1.0] {
        let d = deformation(&inst, "pos", eps);
        let mut worst = 0.0f64;
        for x in 0..inst.space.len() {
            for y in 0..inst.space.len() {
                let (px, py): (f64, f64) = (inst.space.id(x).parse().unwrap(), inst.space.id(y).parse().unwrap());
                worst = worst.max(rel_err(d.distance(x, y), path_deformed(eps, px, py)));
            }
        }
        assert!(worst <= 1e-12, "ε = {eps}: relative error {worst}");
    }
}

#[test]
fn comparison_ratio_on_unit_edge() {
    // ε = 1, x = 0, y = 1: d_ε = e - 1, target e^{-ε(x|y)_b} / 2 with (x|y)_b = -1
    let inst = instance(path(10).unwrap());
    let d = deformation(&inst, "pos", 1.0);
    let (x, y) = (inst.space.vertex("0").unwrap(), inst.space.vertex("1").unwrap());
    let de = d.distance(x, y);
    assert!(rel_err(de, std::f64::consts::E - 1.0) < 1e-15);
    let ratio = de / (std::f64::consts::E / 2.0);
    assert!((ratio - 1.2642411176571153).abs() < 1e-15);
}

#[test]
fn cone_side_on_path_matches_integral() {
    let inst = instance(path(30).unwrap());
    let d = deformation(&inst, "pos", 1.0);
    let arc = PathArc::from_ids(&inst.space, &["-1", "0", "1"]).unwrap();
    let cum = d.cumulative(&arc);
    assert!(rel_err(cum[1], 1.0 - (-1.0f64).exp()) < 1e-15);
    // the far end of the path is the only proxy point
    let proxy = vec![vec![inst.space.vertex("-30").unwrap()]];
    let z = inst.space.vertex("0").unwrap();
    let pd = d.boundary_proxy_distance(z, &proxy).unwrap();
    assert!(rel_err(pd, -(-30.0f64).exp_m1()) < 1e-14);
}

/// Depth of a tree label and the length of its all-zero prefix.
fn label(id: &str) -> Vec<u32> {
    if id == "root" {
        Vec::new()
    } else {
        id.split('.').map(|p| p.parse().unwrap()).collect()
    }
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[test]
fn tree_busemann_matches_confluence() {
    let inst = instance(bary_tree(2, 10).unwrap());
    let field = busemann_field(&inst.space, inst.ray("spineL").unwrap(), inst.basepoint).unwrap();
    for x in 0..inst.space.len() {
        let l = label(inst.space.id(x));
        let zeros = l.iter().take_while(|&&c| c == 0).count();
        assert_eq!(field.value(x), l.len() as f64 - 2.0 * zeros as f64, "vertex {}", inst.space.id(x));
    }
}

#[test]
fn tree_deformed_distance_is_edge_sum() {
    let inst = instance(bary_tree(2, 10).unwrap());
    let s = &inst.space;
    let eps = 0.05;
    let d = deformation(&inst, "spineL", eps);
    let b = |l: &[u32]| l.len() as f64 - 2.0 * l.iter().take_while(|&&c| c == 0).count() as f64;
    // ∫ e^{-εb} over a unit edge on which b moves linearly by ±1
    let edge = |bu: f64, bv: f64| ((-eps * bu).exp() - (-eps * bv).exp()) / (eps * (bv - bu));
    let climb = |l: &[u32], stop: usize| {
        let mut total = 0.0;
        for k in (stop..l.len()).rev() {
            total += edge(b(&l[..k + 1]), b(&l[..k]));
        }
        total
    };
    let ids: Vec<usize> = (0..s.len()).step_by(7).collect();
    let mut worst = 0.0f64;
    for &x in &ids {
        for &y in &ids {
            let (lx, ly) = (label(s.id(x)), label(s.id(y)));
            let meet = common_prefix(&lx, &ly);
            let expected = climb(&lx, meet) + climb(&ly, meet);
            worst = worst.max(rel_err(d.distance(x, y), expected));
        }
    }
    assert!(worst <= 1e-12, "relative error {worst}");
}

fn naive_delta(s: &FiniteMetricSpace) -> f64 {
    let n = s.len();
    let mut delta = 0.0f64;
    for p in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let (xy, yz, xz) = (gromov_product(s, x, y, p), gromov_product(s, y, z, p), gromov_product(s, x, z, p));
                    delta = delta.max(xy.min(yz) - xz);
                }
            }
        }
    }
    delta
}

#[test]
fn exact_delta_matches_exhaustive_oracle() {
    let cycle = build_space(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("d", "a", 1.0)]).unwrap();
    assert_eq!(naive_delta(&cycle), 1.0);
    assert_eq!(delta_exact(&cycle).delta, 1.0);
    for (b, depth) in [(2, 3), (3, 2), (2, 4)] {
        let inst = instance(bary_tree(b, depth).unwrap());
        assert_eq!(naive_delta(&inst.space), 0.0);
        assert_eq!(delta_exact(&inst.space).delta, 0.0);
    }
    let six = build_space(&(0..6).map(|i| (i.to_string(), ((i + 1) % 6).to_string(), 1.0)).collect::<Vec<_>>()).unwrap();
    assert_eq!(delta_exact(&six).delta, naive_delta(&six));
}

#[test]
fn exact_delta_on_larger_trees() {
    for doc in [bary_tree(2, 6).unwrap(), bary_tree(3, 4).unwrap(), path(99).unwrap()] {
        let inst = instance(doc);
        assert!(inst.space.len() <= 200);
        assert_eq!(delta_exact(&inst.space).delta, 0.0);
    }
}

#[test]
fn cycle_products() {
    let s = build_space(&[("0", "1", 1.0), ("1", "2", 1.0), ("2", "3", 1.0), ("3", "0", 1.0)]).unwrap();
    let v = |id: &str| s.vertex(id).unwrap();
    assert_eq!(gromov_product(&s, v("0"), v("1"), v("3")), 1.0);
    assert_eq!(gromov_product(&s, v("0"), v("2"), v("1")), 0.0);
}

#[test]
fn heptagonal_tiling_growth() {
    // vertices of the {7,3} tiling grow as 7, 35, 112, 315, 847 by layer
    for (layers, count) in [(1, 7), (2, 35), (3, 112), (4, 315)] {
        assert_eq!(tessellation_disk(7, 3, layers).unwrap().vertices.len(), count);
    }
}

#[test]
fn small_epsilon_recovers_the_metric() {
    for (doc, ray) in [(path(100).unwrap(), "pos"), (bary_tree(2, 8).unwrap(), "spineL")] {
        let inst = instance(doc);
        let d = deformation(&inst, ray, 1e-8);
        let s = &inst.space;
        let mut worst = 0.0f64;
        for x in 0..s.len() {
            for y in 0..s.len() {
                worst = worst.max((d.distance(x, y) - s.dist(x, y)).abs());
            }
        }
        assert!(worst <= 1e-5 * s.diameter(), "{worst}");
    }
}
