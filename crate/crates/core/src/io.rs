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

//! JSON graph documents and report serialization.
//!
//! A document is `{ "vertices": [id...], "edges": [[u, v, length]...],
//! "basepoint": id, "rays": { name: [id...] } }`. Floats are written with 17
//! significant digits so documents and reports round-trip bit-exactly.

use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};
use serde_json::Value;

use crate::busemann::BoundaryRay;
use crate::error::{Error, Result};
use crate::space::{FiniteMetricSpace, Vertex};

/// Graph input as it appears on disk, in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String, f64)>,
    pub basepoint: String,
    pub rays: IndexMap<String, Vec<String>>,
}

struct EdgeRow<'a>(&'a (String, String, f64));

impl Serialize for EdgeRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(3))?;
        seq.serialize_element(&self.0 .0)?;
        seq.serialize_element(&self.0 .1)?;
        seq.serialize_element(&self.0 .2)?;
        seq.end()
    }
}

impl Serialize for SpaceDocument {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SpaceDocument", 4)?;
        st.serialize_field("vertices", &self.vertices)?;
        st.serialize_field("edges", &self.edges.iter().map(EdgeRow).collect::<Vec<_>>())?;
        st.serialize_field("basepoint", &self.basepoint)?;
        st.serialize_field("rays", &self.rays)?;
        st.end()
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

fn as_id(v: &Value, path: &str) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| schema(path, "expected a string id"))
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(key, format!("missing required key \"{key}\"")))
}

impl SpaceDocument {
    pub fn from_value(value: &Value) -> Result<Self> {
        let obj = value.as_object().ok_or_else(|| schema("$", "expected an object"))?;
        let vertices = field(obj, "vertices")?
            .as_array()
            .ok_or_else(|| schema("vertices", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, v)| as_id(v, &format!("vertices[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut edges = Vec::new();
        for (i, e) in field(obj, "edges")?.as_array().ok_or_else(|| schema("edges", "expected an array"))?.iter().enumerate() {
            let path = format!("edges[{i}]");
            let row = e.as_array().filter(|r| r.len() == 3).ok_or_else(|| schema(&path, "expected [u, v, length]"))?;
            let len = row[2].as_f64().ok_or_else(|| schema(format!("{path}[2]"), "expected a number"))?;
            edges.push((as_id(&row[0], &format!("{path}[0]"))?, as_id(&row[1], &format!("{path}[1]"))?, len));
        }
        let basepoint = as_id(field(obj, "basepoint")?, "basepoint")?;
        let mut rays = IndexMap::new();
        for (name, anchors) in field(obj, "rays")?.as_object().ok_or_else(|| schema("rays", "expected an object"))? {
            let path = format!("rays.{name}");
            let list = anchors
                .as_array()
                .ok_or_else(|| schema(&path, "expected an array of ids"))?
                .iter()
                .enumerate()
                .map(|(i, v)| as_id(v, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            rays.insert(name.clone(), list);
        }
        Ok(Self { vertices, edges, basepoint, rays })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// A validated document with its metric space, basepoint and rays.
#[derive(Debug, Clone)]
pub struct Instance {
    pub document: SpaceDocument,
    pub space: FiniteMetricSpace,
    pub basepoint: Vertex,
    /// Rays in document order.
    pub rays: Vec<BoundaryRay>,
}

impl Instance {
    pub fn from_document(document: SpaceDocument) -> Result<Self> {
        let known: std::collections::HashSet<&str> = document.vertices.iter().map(String::as_str).collect();
        for (i, (u, v, _)) in document.edges.iter().enumerate() {
            for (k, id) in [(0, u), (1, v)] {
                if !known.contains(id.as_str()) {
                    return Err(schema(format!("edges[{i}][{k}]"), format!("unknown vertex \"{id}\"")));
                }
            }
        }
        let space = FiniteMetricSpace::new(document.vertices.clone(), &document.edges)?;
        let basepoint = space.vertex(&document.basepoint).map_err(|_| schema("basepoint", format!("unknown vertex \"{}\"", document.basepoint)))?;
        let mut rays = Vec::with_capacity(document.rays.len());
        for (name, ids) in &document.rays {
            let anchors = ids
                .iter()
                .enumerate()
                .map(|(i, id)| space.vertex(id).map_err(|_| schema(format!("rays.{name}[{i}]"), format!("unknown vertex \"{id}\""))))
                .collect::<Result<Vec<_>>>()?;
            rays.push(BoundaryRay::new(name.clone(), anchors));
        }
        Ok(Self { document, space, basepoint, rays })
    }

    pub fn ray(&self, name: &str) -> Option<&BoundaryRay> {
        self.rays.iter().find(|r| r.name == name)
    }
}

pub fn load_space(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Instance::from_document(SpaceDocument::from_json(&text)?)
}

/// JSON formatter printing every float with 17 significant digits.
#[derive(Default)]
pub struct FullPrecision(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// One CSV row per check: name, holds, theory_bound, empirical_worst,
/// slack_used and the witness as compact JSON.
pub fn checks_csv(checks: &[crate::verify::CheckResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "holds", "theory_bound", "empirical_worst", "slack_used", "witness"]).map_err(csv_err)?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.holds.as_str().to_string(),
            format!("{:.16e}", c.theory_bound),
            format!("{:.16e}", c.empirical_worst),
            format!("{:.16e}", c.slack_used),
            serde_json::to_string(&c.witness)?,
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    #[test]
    fn round_trip_is_structural_identity() {
        let doc = generate::path(8).unwrap();
        let text = doc.to_json().unwrap();
        let back = SpaceDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
        let jit = generate::jittered(&doc, 3, 0.05, 11).unwrap();
        assert_eq!(SpaceDocument::from_json(&jit.to_json().unwrap()).unwrap(), jit);
    }

    #[test]
    fn floats_have_17_digits() {
        let s = to_json_string(&[0.1f64, 1.0 / 3.0]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("3.3333333333333331e-1"), "{s}");
    }

    #[test]
    fn schema_errors_are_positioned() {
        let err = SpaceDocument::from_json(r#"{"vertices":["a","b"],"edges":[["a","b",1]],"basepoint":"a"}"#).unwrap_err();
        assert!(err.to_string().contains("rays"), "{err}");
        let err = SpaceDocument::from_json(r#"{"vertices":["a","b"],"edges":[["a","b",1],["a",2,1]],"basepoint":"a","rays":{}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("edges[1][1]"), "{err}");
        let doc = SpaceDocument::from_json(r#"{"vertices":["a","b"],"edges":[["a","b",1],["b","a",1]],"basepoint":"a","rays":{}}"#).unwrap();
        assert!(matches!(Instance::from_document(doc), Err(Error::DuplicateEdge(..))));
        let doc = SpaceDocument::from_json(r#"{"vertices":["a","b"],"edges":[["a","c",1]],"basepoint":"a","rays":{}}"#).unwrap();
        assert!(Instance::from_document(doc).unwrap_err().to_string().contains("edges[0][1]"));
    }
}
