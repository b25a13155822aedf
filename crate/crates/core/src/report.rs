//! Versioned JSON reports in which every number carries its provenance.
//!
//! A report is `{schema_version, kind, config, results}`. `config` echoes the
//! inputs verbatim. Inside `results` every numeric leaf is written as
//! `{"value": x, "provenance": p}`. A section has a default provenance; an
//! object holding a `provenance` string sets it for its own subtree, and
//! per-key overrides take precedence over both.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::geometry::Polyhedron;
use crate::mesh::SimplicialMesh;
use crate::poincare::PoincareCertificate;
use crate::sobolev::NormReport;
use crate::weights::Equivalence;
use crate::wellposed::{ConvergenceTable, SolveReport, WindowEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed form or exact geometric computation.
    Analytic,
    Eigensolve,
    /// A functional of quadrature-assembled operators (norms, errors, solves).
    Quadrature,
    Sampled,
    RegressionFrozen,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Eigensolve => "eigensolve",
            Provenance::Quadrature => "quadrature",
            Provenance::Sampled => "sampled",
            Provenance::RegressionFrozen => "regression-frozen",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Self::Analytic,
            Self::Eigensolve,
            Self::Quadrature,
            Self::Sampled,
            Self::RegressionFrozen,
        ]
        .into_iter()
        .find(|p| p.as_str() == s || s.replace('_', "-") == p.as_str())
    }
}

/// Rewrites every number below `value` as `{value, provenance}`.
pub fn tag(value: Value, default: Provenance, overrides: &[(&str, Provenance)]) -> Value {
    match value {
        Value::Number(n) => {
            let mut m = Map::new();
            m.insert("value".into(), Value::Number(n));
            m.insert("provenance".into(), Value::String(default.as_str().into()));
            Value::Object(m)
        }
        Value::Array(items) => Value::Array(
            items
                .into_iter()
                .map(|v| tag(v, default, overrides))
                .collect(),
        ),
        Value::Object(obj) => {
            let own = obj
                .get("provenance")
                .and_then(Value::as_str)
                .and_then(Provenance::parse)
                .unwrap_or(default);
            Value::Object(
                obj.into_iter()
                    .map(|(k, v)| {
                        let p = overrides
                            .iter()
                            .find(|o| o.0 == k)
                            .map(|o| o.1)
                            .unwrap_or(own);
                        let v = if k == "provenance" {
                            v
                        } else {
                            tag(v, p, overrides)
                        };
                        (k, v)
                    })
                    .collect(),
            )
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: String,
    pub config: Value,
    pub results: Map<String, Value>,
}

fn to_value(data: &impl Serialize) -> Result<Value> {
    serde_json::to_value(data)
        .map_err(|e| Error::InvalidArgument(format!("unserializable report data: {e}")))
}

impl Report {
    pub fn new(kind: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Report {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            config: to_value(config)?,
            results: Map::new(),
        })
    }

    pub fn section(
        mut self,
        name: &str,
        data: &impl Serialize,
        default: Provenance,
        overrides: &[(&str, Provenance)],
    ) -> Result<Self> {
        self.results
            .insert(name.to_string(), tag(to_value(data)?, default, overrides));
        Ok(self)
    }

    /// Pretty JSON with sorted keys and a trailing newline, so equal inputs
    /// give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are plain JSON");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct DomainSummary {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    edges: usize,
    faces: usize,
    singular_edges: usize,
    measure: f64,
    diameter: f64,
    min_edge_length: f64,
    /// Interior angles (2D) or dihedral angles of the singular edges (3D).
    opening_angles: Vec<f64>,
}

pub fn domain_report(p: &Polyhedron, config: &impl Serialize) -> Result<Report> {
    let opening_angles = if p.dim() == 2 {
        (0..p.num_vertices())
            .map(|v| p.interior_angle(v))
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..p.edges().len())
            .map(|e| p.dihedral_angle(e))
            .collect::<Result<Vec<_>>>()?
    };
    let s = DomainSummary {
        dim: p.dim(),
        vertices: p.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
        edges: p.edges().len(),
        faces: p.faces().len(),
        singular_edges: if p.dim() == 3 {
            p.singular_edges().len()
        } else {
            0
        },
        measure: p.measure(),
        diameter: p.diameter(),
        min_edge_length: p.min_edge_length(),
        opening_angles,
    };
    Report::new("domain", config)?.section("domain", &s, Provenance::Analytic, &[])
}

#[derive(Serialize)]
struct MeshSummary {
    dim: usize,
    nodes: usize,
    elements: usize,
    boundary_facets: usize,
    singular_nodes: usize,
    max_diameter: f64,
    min_diameter: f64,
    min_angle: f64,
    total_measure: f64,
}

pub fn mesh_summary(m: &SimplicialMesh) -> impl Serialize {
    MeshSummary {
        dim: m.dim(),
        nodes: m.num_nodes(),
        elements: m.num_elements(),
        boundary_facets: m.num_boundary_facets(),
        singular_nodes: m.singular_nodes().len(),
        max_diameter: m.max_diameter(),
        min_diameter: m.min_diameter(),
        min_angle: m.min_angle(),
        total_measure: m.total_measure(),
    }
}

pub fn mesh_report(m: &SimplicialMesh, config: &impl Serialize) -> Result<Report> {
    Report::new("mesh", config)?.section("mesh", &mesh_summary(m), Provenance::Analytic, &[])
}

pub fn equivalence_report(
    m: &SimplicialMesh,
    eq: &Equivalence,
    config: &impl Serialize,
) -> Result<Report> {
    Report::new("weights-certify", config)?
        .section("mesh", &mesh_summary(m), Provenance::Analytic, &[])?
        .section("equivalence", eq, Provenance::Sampled, &[])
}

pub fn norm_report(
    m: &SimplicialMesh,
    norm: &NormReport,
    config: &impl Serialize,
) -> Result<Report> {
    Report::new("norm", config)?
        .section("mesh", &mesh_summary(m), Provenance::Analytic, &[])?
        .section(
            "norm",
            norm,
            Provenance::Quadrature,
            &[
                ("spec", Provenance::Analytic),
                ("quadrature", Provenance::Analytic),
            ],
        )
}

/// Keys of a certificate whose values are not eigensolve outputs.
const CERTIFICATE_OVERRIDES: [(&str, Provenance); 8] = [
    ("epsilon", Provenance::Analytic),
    ("delta", Provenance::Analytic),
    ("theta", Provenance::Analytic),
    ("stated_factor", Provenance::Analytic),
    ("cross_check", Provenance::Eigensolve),
    ("eta_ratio", Provenance::Sampled),
    ("eta_min_sampled", Provenance::Sampled),
    ("eta_min_offset", Provenance::Analytic),
];

pub fn poincare_report(
    m: &SimplicialMesh,
    cert: &PoincareCertificate,
    config: &impl Serialize,
) -> Result<Report> {
    let mut overrides = CERTIFICATE_OVERRIDES.to_vec();
    overrides.push(("samples", Provenance::Sampled));
    overrides.push(("eta_min", Provenance::Sampled));
    Report::new("poincare", config)?
        .section("mesh", &mesh_summary(m), Provenance::Analytic, &[])?
        .section("certificate", cert, Provenance::Eigensolve, &overrides)
}

pub fn solve_report(
    m: &SimplicialMesh,
    rep: &SolveReport,
    config: &impl Serialize,
) -> Result<Report> {
    Report::new("solve", config)?
        .section("mesh", &mesh_summary(m), Provenance::Analytic, &[])?
        .section(
            "solve",
            rep,
            Provenance::Quadrature,
            &[("a", Provenance::Analytic)],
        )
}

pub fn convergence_report(table: &ConvergenceTable, config: &impl Serialize) -> Result<Report> {
    let (l2, h1, h1_nodes) = table.fitted_rates();
    #[derive(Serialize)]
    struct Fitted {
        l2_rate: f64,
        h1_rate: f64,
        h1_rate_nodes: f64,
    }
    Report::new("convergence", config)?
        .section(
            "table",
            table,
            Provenance::Quadrature,
            &[("nodes", Provenance::Analytic), ("h", Provenance::Analytic)],
        )?
        .section(
            "fitted",
            &Fitted {
                l2_rate: l2,
                h1_rate: h1,
                h1_rate_nodes: h1_nodes,
            },
            Provenance::Quadrature,
            &[],
        )
}

pub fn window_report(
    m: &SimplicialMesh,
    est: &WindowEstimate,
    config: &impl Serialize,
) -> Result<Report> {
    Report::new("window-probe", config)?
        .section("mesh", &mesh_summary(m), Provenance::Analytic, &[])?
        .section(
            "window",
            est,
            Provenance::Eigensolve,
            &[
                ("a", Provenance::Analytic),
                ("threshold", Provenance::Analytic),
                ("predicted", Provenance::Analytic),
                ("response", Provenance::Quadrature),
                ("solve_iterations", Provenance::Quadrature),
                ("solve_error", Provenance::Quadrature),
            ],
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn every_number_is_tagged() {
        let v = json!({"x": 1.5, "inner": {"provenance": "sampled", "n": 3, "k": [2.0]}, "s": "text", "none": null});
        let t = tag(v, Provenance::Eigensolve, &[("k", Provenance::Analytic)]);
        assert_eq!(t["x"], json!({"value": 1.5, "provenance": "eigensolve"}));
        assert_eq!(
            t["inner"]["n"],
            json!({"value": 3, "provenance": "sampled"})
        );
        assert_eq!(
            t["inner"]["k"][0],
            json!({"value": 2.0, "provenance": "analytic"})
        );
        assert_eq!(t["inner"]["provenance"], json!("sampled"));
        assert_eq!(t["s"], json!("text"));
        assert_eq!(t["none"], Value::Null);
    }

    fn untagged_numbers(v: &Value, inside_tag: bool) -> usize {
        match v {
            Value::Number(_) => usize::from(!inside_tag),
            Value::Array(a) => a.iter().map(|x| untagged_numbers(x, false)).sum(),
            Value::Object(o) => {
                let is_tag =
                    o.len() == 2 && o.contains_key("value") && o.contains_key("provenance");
                o.values().map(|x| untagged_numbers(x, is_tag)).sum()
            }
            _ => 0,
        }
    }

    #[test]
    fn domain_report_is_fully_tagged_and_versioned() {
        let r = domain_report(&Polyhedron::l_shape(), &json!({"domain": "l_shape"})).unwrap();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
        assert_eq!(untagged_numbers(&v["results"], false), 0);
        let angles = v["results"]["domain"]["opening_angles"].as_array().unwrap();
        assert!((angles[0]["value"].as_f64().unwrap() - 1.5 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn provenance_names() {
        assert_eq!(
            serde_json::to_value(Provenance::RegressionFrozen).unwrap(),
            json!("regression-frozen")
        );
        assert_eq!(
            Provenance::parse("regression_frozen"),
            Some(Provenance::RegressionFrozen)
        );
    }
}
