//! Browser bindings: weight rasters, the L-shape corner solution and the
//! weight-window curve.

use std::f64::consts::PI;

use klab_core::fem::{FemField, QuadPolicy};
use klab_core::mesh::{refine, triangulate};
use klab_core::weights::{eta, WeightField};
use klab_core::wellposed::{
    solve_dirichlet, weight_window_probe, BvpProblem, Data, WINDOW_THRESHOLD,
};
use klab_core::{GradingSpec, Point, Polyhedron, SimplicialMesh};
use wasm_bindgen::prelude::*;

type Res<T> = Result<T, String>;

fn err(e: klab_core::Error) -> String {
    e.to_string()
}

fn js<T>(r: Res<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn domain(name: &str) -> Res<Polyhedron> {
    match name {
        "square" => Ok(Polyhedron::unit_square()),
        "l_shape" => Ok(Polyhedron::l_shape()),
        "pentagon" => {
            Polyhedron::polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 0.4], [0.0, 1.0]])
                .map_err(err)
        }
        other => Err(format!("unknown domain `{other}`")),
    }
}

fn graded_mesh(p: &Polyhedron, h: f64, kappa: f64, levels: usize) -> Res<SimplicialMesh> {
    if levels > 4 {
        return Err("at most 4 refinement levels in the browser".into());
    }
    let base = triangulate(p, h).map_err(err)?;
    refine(&base, &GradingSpec::new(kappa, levels).map_err(err)?, p).map_err(err)
}

/// Row-major samples over the bounding box; `NaN` outside the domain.
#[wasm_bindgen]
pub struct Raster {
    width: usize,
    height: usize,
    bounds: Vec<f64>,
    data: Vec<f64>,
    outline: Vec<f64>,
}

#[wasm_bindgen]
impl Raster {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `[xmin, ymin, xmax, ymax]`.
    #[wasm_bindgen(getter)]
    pub fn bounds(&self) -> Vec<f64> {
        self.bounds.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn data(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Vertex coordinates `x0, y0, x1, y1, ...` of the boundary cycle.
    #[wasm_bindgen(getter)]
    pub fn outline(&self) -> Vec<f64> {
        self.outline.clone()
    }
}

/// Samples `eta` (`kind = "eta"`) or `r_omega` (`kind = "r_omega"`) on a
/// `width x height` grid. In 2D `r_omega` is the smoothed distance, so no
/// mesh is needed.
#[wasm_bindgen]
pub fn weight_raster(
    domain_name: &str,
    kind: &str,
    width: usize,
    height: usize,
) -> Result<Raster, JsError> {
    js(raster(domain_name, kind, width, height))
}

fn raster(domain_name: &str, kind: &str, width: usize, height: usize) -> Res<Raster> {
    if !(2..=1024).contains(&width) || !(2..=1024).contains(&height) {
        return Err("raster size must lie in 2..=1024".into());
    }
    let p = domain(domain_name)?;
    let field = match kind {
        "eta" => None,
        "r_omega" => {
            let m = triangulate(&p, 0.5).map_err(err)?;
            Some(WeightField::r_omega(&p, &m).map_err(err)?)
        }
        other => return Err(format!("unknown weight `{other}`")),
    };
    let (lo, hi) = p.bounding_box();
    let mut data = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            let x = Point::new(
                lo.x + (hi.x - lo.x) * i as f64 / (width - 1) as f64,
                hi.y - (hi.y - lo.y) * j as f64 / (height - 1) as f64,
                0.0,
            );
            let v = if p.contains(&x, 1e-12) {
                match &field {
                    None => eta(&p, &x).map_err(err)?,
                    Some(f) => f.eval(&x).map_err(err)?,
                }
            } else {
                f64::NAN
            };
            data.push(v);
        }
    }
    let outline = p.vertices().iter().flat_map(|v| [v.x, v.y]).collect();
    Ok(Raster {
        width,
        height,
        bounds: vec![lo.x, lo.y, hi.x, hi.y],
        data,
        outline,
    })
}

/// A P1 field on a triangle mesh with its error against the exact solution.
#[wasm_bindgen]
pub struct CornerSolution {
    nodes: Vec<f64>,
    triangles: Vec<u32>,
    values: Vec<f64>,
    l2_error: f64,
    h1_error: f64,
    iterations: usize,
}

#[wasm_bindgen]
impl CornerSolution {
    /// `x0, y0, x1, y1, ...`
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> Vec<f64> {
        self.nodes.clone()
    }

    /// Node indices, three per triangle.
    #[wasm_bindgen(getter)]
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn l2_error(&self) -> f64 {
        self.l2_error
    }

    #[wasm_bindgen(getter)]
    pub fn h1_error(&self) -> f64 {
        self.h1_error
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

fn corner_exact(x: &Point) -> f64 {
    let r = x.x.hypot(x.y);
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    r.powf(2.0 / 3.0) * (2.0 * t / 3.0).sin()
}

fn corner_gradient(x: &Point) -> Point {
    let r = x.x.hypot(x.y);
    if r == 0.0 {
        return Point::zeros();
    }
    let t = x.y.atan2(x.x).rem_euclid(2.0 * PI);
    let c = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
    let (dr, dt) = (c * (2.0 * t / 3.0).sin(), c * (2.0 * t / 3.0).cos());
    Point::new(
        dr * t.cos() - dt * t.sin(),
        dr * t.sin() + dt * t.cos(),
        0.0,
    )
}

/// Solves `-lap u = 0` on the L-shape with `u = r^(2/3) sin(2 theta/3)` on
/// the boundary, on a mesh graded with exponent `kappa`.
#[wasm_bindgen]
pub fn solve_corner(h: f64, kappa: f64, levels: usize) -> Result<CornerSolution, JsError> {
    js(corner(h, kappa, levels))
}

fn corner(h: f64, kappa: f64, levels: usize) -> Res<CornerSolution> {
    let p = Polyhedron::l_shape();
    let m = graded_mesh(&p, h, kappa, levels)?;
    let rep = solve_dirichlet(&BvpProblem::new(&p, &m).boundary(Data::function(corner_exact)))
        .map_err(err)?;
    let u = FemField::new(&m, rep.solution).map_err(err)?;
    let policy = QuadPolicy::default();
    let l2_error = u.l2_error(&|x| Ok(corner_exact(x)), policy).map_err(err)?;
    let h1_error = u
        .h1_seminorm_error(&|x| Ok(corner_gradient(x)), policy)
        .map_err(err)?;
    Ok(CornerSolution {
        nodes: m.nodes().iter().flat_map(|x| [x.x, x.y]).collect(),
        triangles: m
            .elements()
            .flat_map(|e| e.iter().map(|&i| i as u32).collect::<Vec<_>>())
            .collect(),
        values: u.into_values(),
        l2_error,
        h1_error,
        iterations: rep.iterations,
    })
}

/// Coercivity of the conjugated form along an index grid.
#[wasm_bindgen]
pub struct WindowCurve {
    a: Vec<f64>,
    coercivity: Vec<f64>,
    kappa: f64,
    predicted: f64,
    onset: Vec<f64>,
}

#[wasm_bindgen]
impl WindowCurve {
    #[wasm_bindgen(getter)]
    pub fn a(&self) -> Vec<f64> {
        self.a.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn coercivity(&self) -> Vec<f64> {
        self.coercivity.clone()
    }

    /// Variational Hardy constant of the mesh.
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `min_v pi / theta_v`.
    #[wasm_bindgen(getter)]
    pub fn predicted(&self) -> f64 {
        self.predicted
    }

    /// `[last stable a, first degraded a]`, empty if none degraded.
    #[wasm_bindgen(getter)]
    pub fn onset(&self) -> Vec<f64> {
        self.onset.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> f64 {
        WINDOW_THRESHOLD
    }
}

/// Sweeps `a` over `samples` points of `[0, a_max]`.
#[wasm_bindgen]
pub fn window_curve(
    domain_name: &str,
    h: f64,
    kappa: f64,
    levels: usize,
    a_max: f64,
    samples: usize,
) -> Result<WindowCurve, JsError> {
    js(window(domain_name, h, kappa, levels, a_max, samples))
}

fn window(
    domain_name: &str,
    h: f64,
    kappa: f64,
    levels: usize,
    a_max: f64,
    samples: usize,
) -> Res<WindowCurve> {
    if !(2..=64).contains(&samples) {
        return Err("samples must lie in 2..=64".into());
    }
    let p = domain(domain_name)?;
    let m = graded_mesh(&p, h, kappa, levels)?;
    let grid: Vec<f64> = (0..samples)
        .map(|i| a_max * i as f64 / (samples - 1) as f64)
        .collect();
    let est = weight_window_probe(&p, &m, &grid).map_err(err)?;
    Ok(WindowCurve {
        a: est.points.iter().map(|q| q.a).collect(),
        coercivity: est.points.iter().map(|q| q.coercivity).collect(),
        kappa: est.kappa,
        predicted: est.predicted.unwrap_or(f64::NAN),
        onset: est.onset.map(|(lo, hi)| vec![lo, hi]).unwrap_or_default(),
    })
}
