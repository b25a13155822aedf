//! Domain and problem files.
//!
//! Domain file:
//!
//! ```json
//! {"schema_version": 1, "shape": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
//! ```
//!
//! `shape` is one of `polygon`, `unit_square`, `l_shape` (`size`),
//! `unit_box`, `box` (`lx`, `ly`, `lz`), `l_prism` (`size`, `height`),
//! `fichera` (`size`).
//!
//! Problem file: a domain (path relative to the problem file, or an inline
//! domain object), mesh parameters, and closed-form data. See [`ProblemFile`].

use std::fs;
use std::path::Path;

use klab_core::config::SCHEMA_VERSION;
use klab_core::geometry::l_shape_vertices;
use klab_core::wellposed::Sign;
use klab_core::{Error, Generator, Polyhedron, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    UnitSquare,
    LShape {
        #[serde(default = "one")]
        size: f64,
    },
    UnitBox,
    Box {
        lx: f64,
        ly: f64,
        lz: f64,
    },
    LPrism {
        size: f64,
        height: f64,
    },
    Fichera {
        size: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn build(&self) -> Result<Polyhedron> {
        match self {
            DomainSpec::Polygon { vertices } => Polyhedron::polygon(vertices),
            DomainSpec::UnitSquare => Ok(Polyhedron::unit_square()),
            DomainSpec::LShape { size } => {
                if !(*size > 0.0 && size.is_finite()) {
                    return Err(Error::Geometry(format!(
                        "nonpositive dimension size = {size}"
                    )));
                }
                Polyhedron::polygon(&l_shape_vertices(*size))
            }
            DomainSpec::UnitBox => Ok(Polyhedron::unit_box()),
            DomainSpec::Box { lx, ly, lz } => Polyhedron::generate(Generator::Box {
                lx: *lx,
                ly: *ly,
                lz: *lz,
            }),
            DomainSpec::LPrism { size, height } => Polyhedron::generate(Generator::LPrism {
                size: *size,
                height: *height,
            }),
            DomainSpec::Fichera { size } => {
                Polyhedron::generate(Generator::Fichera { size: *size })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshParams {
    /// Target element size of the base triangulation.
    pub h: f64,
    /// Radial grading exponent in `(0, 1]`; 1 is uniform.
    #[serde(default = "one")]
    pub kappa: f64,
    /// Refinements applied to the base mesh before the first study level.
    #[serde(default)]
    pub levels: usize,
}

/// A Dirichlet problem `-lap u = f` (or `lap u = f`), `u = g` on the boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    /// Path (relative to the problem file) or inline domain object.
    pub domain: Value,
    pub mesh: MeshParams,
    #[serde(default)]
    pub equation: Sign,
    /// Vertex about which `r` and `theta` are measured.
    #[serde(default)]
    pub anchor_vertex: usize,
    #[serde(default = "zero_expr")]
    pub source: String,
    #[serde(default = "zero_expr")]
    pub boundary: String,
    /// Exact solution; enables error columns and multi-level studies.
    #[serde(default)]
    pub exact: Option<String>,
    /// Components of the exact gradient; central differences otherwise.
    #[serde(default)]
    pub exact_gradient: Option<Vec<String>>,
    /// Weight index `a` of the conjugated solve.
    #[serde(default)]
    pub a: f64,
    /// Order `mu` of the reported norm table.
    #[serde(default)]
    pub order: i32,
    /// Number of meshes in a study (each one uniform refinement finer).
    #[serde(default = "one_level")]
    pub levels: usize,
}

fn zero_expr() -> String {
    "0".into()
}

fn one_level() -> usize {
    1
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deserializes with the failing field path in the error.
pub fn from_value<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, ".") => "(root)".to_string(),
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        Error::Schema {
            path,
            msg: e.into_inner().to_string(),
        }
    })
}

fn parse_json(text: &str, path: &Path) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn check_version(v: &Value, field: &str) -> Result<()> {
    match v.get("schema_version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION as u64) => Ok(()),
        Some(other) => Err(Error::Schema {
            path: field.to_string(),
            msg: format!("unsupported schema version {other}, expected {SCHEMA_VERSION}"),
        }),
        None => Err(Error::Schema {
            path: field.to_string(),
            msg: "missing field `schema_version`".into(),
        }),
    }
}

const UNIT_SHAPES: [&str; 2] = ["unit_square", "unit_box"];

fn domain_from_value(mut v: Value, prefix: &str, versioned: bool) -> Result<DomainSpec> {
    let at = |field: &str| {
        if prefix.is_empty() {
            field.to_string()
        } else {
            format!("{prefix}.{field}")
        }
    };
    let schema = |field: &str, msg: String| Error::Schema {
        path: at(field),
        msg,
    };
    let Some(obj) = v.as_object_mut() else {
        return Err(Error::Schema {
            path: if prefix.is_empty() {
                "(root)".into()
            } else {
                prefix.into()
            },
            msg: "expected an object".into(),
        });
    };
    if versioned || obj.contains_key("schema_version") {
        check_version(&Value::Object(obj.clone()), &at("schema_version"))?;
    }
    obj.remove("schema_version");
    let shape = match obj.remove("shape") {
        Some(Value::String(s)) => s,
        Some(other) => return Err(schema("shape", format!("expected a string, got {other}"))),
        None => return Err(schema("shape", "missing field `shape`".into())),
    };
    // Externally tagged form `{shape: {fields}}`, so failing paths survive.
    let body = if obj.is_empty() && UNIT_SHAPES.contains(&shape.as_str()) {
        Value::Null
    } else {
        Value::Object(std::mem::take(obj))
    };
    let tagged = Value::Object([(shape.clone(), body)].into_iter().collect());
    from_value(tagged, "").map_err(|e| match e {
        Error::Schema { path, msg } => {
            let inner = path
                .strip_prefix(&shape)
                .map(|r| r.trim_start_matches('.'))
                .unwrap_or(&path);
            let path = match (
                prefix.is_empty(),
                inner.is_empty() || inner == "(root)" || inner == ".",
            ) {
                (true, true) => "(root)".to_string(),
                (true, false) => inner.to_string(),
                (false, true) => prefix.to_string(),
                (false, false) => format!("{prefix}.{inner}"),
            };
            Error::Schema { path, msg }
        }
        other => other,
    })
}

pub fn load_domain(path: &Path) -> Result<(DomainSpec, Polyhedron)> {
    let spec = domain_from_value(parse_json(&read(path)?, path)?, "", true)?;
    let p = spec.build()?;
    Ok((spec, p))
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub domain_spec: DomainSpec,
    pub domain: Polyhedron,
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let v = parse_json(&read(path)?, path)?;
    check_version(&v, "schema_version")?;
    let file: ProblemFile = from_value(v, "")?;
    let domain_spec = match &file.domain {
        Value::String(rel) => {
            let p = path.parent().unwrap_or(Path::new(".")).join(rel);
            domain_from_value(parse_json(&read(&p)?, &p)?, "", true)?
        }
        other => domain_from_value(other.clone(), "domain", false)?,
    };
    let domain = domain_spec.build()?;
    if file.levels == 0 {
        return Err(Error::Schema {
            path: "levels".into(),
            msg: "must be at least 1".into(),
        });
    }
    if !(file.mesh.h > 0.0 && file.mesh.h.is_finite()) {
        return Err(Error::Schema {
            path: "mesh.h".into(),
            msg: format!("must be positive, got {}", file.mesh.h),
        });
    }
    Ok(Problem {
        file,
        domain_spec,
        domain,
    })
}
