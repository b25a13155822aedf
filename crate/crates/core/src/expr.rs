//! Closed-form scalar expressions for problem files.
//!
//! Arithmetic (`+ - * / ^`, unary minus, parentheses) over the variables
//! `x, y, z`, the polar pair `r, theta` about an anchor vertex, and the
//! constants `pi` and `e`. Functions: `sin, cos, tan, exp, ln, sqrt, abs`.
//! Integer literals are read as floats, so `2/3` means two thirds.
//!
//! In 2D, `theta` is measured counter-clockwise from the side leaving the
//! anchor vertex, in `[0, 2pi)`; for the L-shape anchored at its reentrant
//! corner the domain is `0 < theta < 3pi/2`. `theta` is unavailable in 3D.

use std::f64::consts::{E, PI, TAU};
use std::fmt;

use evalexpr::{
    build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node,
    Operator, Value,
};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polyhedron};

pub const VARIABLES: [&str; 7] = ["x", "y", "z", "r", "theta", "pi", "e"];
pub const FUNCTIONS: [&str; 7] = ["sin", "cos", "tan", "exp", "ln", "sqrt", "abs"];

type V = Value<DefaultNumericTypes>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Anchor {
    origin: Point,
    /// Unit direction of `theta = 0` and its ccw normal (2D only).
    frame: Option<(Point, Point)>,
}

/// A parsed, whitelisted expression bound to an anchor vertex.
#[derive(Clone)]
pub struct Expr {
    source: String,
    tree: Node<DefaultNumericTypes>,
    anchor: Anchor,
    vertex: usize,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expr")
            .field("source", &self.source)
            .field("vertex", &self.vertex)
            .finish()
    }
}

struct PointContext {
    vars: [V; 7],
}

impl Context for PointContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&V> {
        VARIABLES
            .iter()
            .position(|v| *v == identifier)
            .map(|i| &self.vars[i])
    }

    fn call_function(
        &self,
        identifier: &str,
        argument: &V,
    ) -> EvalexprResult<V, DefaultNumericTypes> {
        let t = argument.as_number()?;
        let v = match identifier {
            "sin" => t.sin(),
            "cos" => t.cos(),
            "tan" => t.tan(),
            "exp" => t.exp(),
            "ln" => t.ln(),
            "sqrt" => t.sqrt(),
            "abs" => t.abs(),
            _ => {
                return Err(EvalexprError::FunctionIdentifierNotFound(
                    identifier.to_string(),
                ))
            }
        };
        Ok(Value::Float(v))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        true
    }

    fn set_builtin_functions_disabled(
        &mut self,
        disabled: bool,
    ) -> EvalexprResult<(), DefaultNumericTypes> {
        if disabled {
            Ok(())
        } else {
            Err(EvalexprError::BuiltinFunctionsCannotBeEnabled)
        }
    }
}

/// Rewrites integer constants as floats and rejects every operator outside
/// plain arithmetic.
fn sanitize(node: &mut Node<DefaultNumericTypes>) -> std::result::Result<(), String> {
    match node.operator_mut() {
        Operator::Const { value } => match value {
            Value::Int(i) => *value = Value::Float(*i as f64),
            Value::Float(_) => {}
            other => return Err(format!("literal {other} is not a number")),
        },
        Operator::RootNode
        | Operator::Add
        | Operator::Sub
        | Operator::Neg
        | Operator::Mul
        | Operator::Div
        | Operator::Exp
        | Operator::VariableIdentifierRead { .. }
        | Operator::FunctionIdentifier { .. } => {}
        op => return Err(format!("operator `{op}` is not allowed")),
    }
    for c in node.children_mut() {
        sanitize(c)?;
    }
    Ok(())
}

impl Expr {
    /// Parses `source` with `r`, `theta` anchored at vertex `vertex` of `domain`.
    pub fn parse(source: &str, domain: &Polyhedron, vertex: usize) -> Result<Self> {
        let err = |msg: String| Error::Expression {
            expr: source.to_string(),
            msg,
        };
        if vertex >= domain.num_vertices() {
            return Err(err(format!(
                "anchor vertex {vertex} does not exist ({} vertices)",
                domain.num_vertices()
            )));
        }
        let mut tree =
            build_operator_tree::<DefaultNumericTypes>(source).map_err(|e| err(e.to_string()))?;
        for v in tree.iter_variable_identifiers() {
            if !VARIABLES.contains(&v) {
                return Err(err(format!(
                    "unknown variable `{v}` (allowed: {})",
                    VARIABLES.join(", ")
                )));
            }
            if v == "theta" && domain.dim() != 2 {
                return Err(err("`theta` is only defined for polygons".into()));
            }
        }
        for f in tree.iter_function_identifiers() {
            if !FUNCTIONS.contains(&f) {
                return Err(err(format!(
                    "unknown function `{f}` (allowed: {})",
                    FUNCTIONS.join(", ")
                )));
            }
        }
        sanitize(&mut tree).map_err(err)?;
        let origin = domain.vertex(vertex);
        let frame = (domain.dim() == 2).then(|| {
            let next = domain.vertex((vertex + 1) % domain.num_vertices());
            let e1 = (next - origin).normalize();
            (e1, Point::new(-e1.y, e1.x, 0.0))
        });
        let expr = Expr {
            source: source.to_string(),
            tree,
            anchor: Anchor { origin, frame },
            vertex,
        };
        // The result must be numeric; probe once at the vertex centroid.
        let probe = domain.vertices().iter().sum::<Point>() / domain.num_vertices() as f64;
        expr.eval(&probe)?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vertex(&self) -> usize {
        self.vertex
    }

    /// Polar coordinates `(r, theta)` of `x` about the anchor.
    pub fn polar(&self, x: &Point) -> (f64, f64) {
        let d = x - self.anchor.origin;
        let r = d.norm();
        let theta = match self.anchor.frame {
            Some((e1, e2)) if r > 0.0 => d.dot(&e2).atan2(d.dot(&e1)).rem_euclid(TAU),
            _ => 0.0,
        };
        (r, theta)
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        let (r, theta) = self.polar(x);
        let ctx = PointContext {
            vars: [x.x, x.y, x.z, r, theta, PI, E].map(Value::Float),
        };
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Expression {
                expr: self.source.clone(),
                msg: e.to_string(),
            })
    }
}
