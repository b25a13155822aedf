use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::fem::{assemble_stiffness, FemField};
use crate::geometry::{Generator, Polyhedron, SphericalPolygon};
use crate::mesh::{refine, refine_uniform, triangulate, GradingSpec, SimplicialMesh};
use crate::sobolev::{k_norm, NormSpec};
use crate::weights::{interior_samples, WeightField};

fn l_prism() -> Polyhedron {
    Polyhedron::generate(Generator::LPrism {
        size: 1.0,
        height: 1.0,
    })
    .unwrap()
}

fn count(d: &Decomposition, kind: RegionKind) -> usize {
    d.of_kind(kind).count()
}

#[test]
fn unit_box_accepts_first_trial() {
    let d = build_decomposition(&Polyhedron::unit_box()).unwrap();
    assert_eq!((d.epsilon, d.delta, d.halvings), (0.25, 0.125, 0));
    assert_eq!(count(&d, RegionKind::EdgeCylinder), 12);
    assert_eq!(count(&d, RegionKind::VertexCone), 24);
    assert_eq!(count(&d, RegionKind::VertexBall), 8);
    for r in d.of_kind(RegionKind::EdgeCylinder) {
        assert!((r.theta.unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((r.length - 0.5).abs() < 1e-15);
    }
    let slope = 0.125 / (0.25f64.powi(2) + 0.125f64.powi(2)).sqrt();
    assert!(d
        .of_kind(RegionKind::VertexCone)
        .all(|r| (r.slope - slope).abs() < 1e-15));
}

#[test]
fn l_prism_decomposition_regression() {
    // The reentrant edge needs no extra halving: epsilon = 1/4 is accepted.
    let d = build_decomposition(&l_prism()).unwrap();
    assert_eq!((d.epsilon, d.delta, d.halvings), (0.25, 0.125, 0));
    assert_eq!(d.regions.len(), 18 + 36 + 12);
    let reflex = d
        .of_kind(RegionKind::EdgeCylinder)
        .filter(|r| r.theta.unwrap() > PI)
        .count();
    assert_eq!(reflex, 1);
}

#[test]
fn unit_square_sectors() {
    let d = build_decomposition(&Polyhedron::unit_square()).unwrap();
    assert_eq!(d.regions.len(), 4);
    for r in &d.regions {
        assert_eq!(r.kind, RegionKind::VertexSector);
        assert_eq!(r.radius, 0.25);
        assert!((r.theta.unwrap() - PI / 2.0).abs() < 1e-12);
    }
}

/// Independent of the search's own sampler: global interior points.
fn check_cover_invariants(p: &Polyhedron, d: &Decomposition) {
    for x in interior_samples(p, 20_000) {
        for kind in [
            RegionKind::EdgeCylinder,
            RegionKind::VertexCone,
            RegionKind::VertexBall,
            RegionKind::VertexSector,
        ] {
            let hits: Vec<&Region> = d.of_kind(kind).filter(|r| r.contains(p, &x)).collect();
            assert!(hits.len() <= 1, "{x:?} in two regions of one kind");
            if let Some(r) = hits.first() {
                if kind != RegionKind::VertexBall {
                    let (_, rad, t) = r.cylindrical(&x);
                    assert!((p.distance_to_singular(&x) - rad).abs() <= 1e-10);
                    assert!(t < r.theta.unwrap());
                }
            }
        }
    }
}

#[test]
fn cover_invariants_hold_on_interior_samples() {
    for p in [
        Polyhedron::unit_square(),
        Polyhedron::l_shape(),
        Polyhedron::unit_box(),
        l_prism(),
    ] {
        check_cover_invariants(&p, &build_decomposition(&p).unwrap());
    }
}

#[test]
fn zero_field_gives_zero_sides() {
    let p = Polyhedron::unit_box();
    let m = triangulate(&p, 0.25).unwrap();
    let d = build_decomposition(&p).unwrap();
    let u = FemField::new(&m, vec![0.0; m.num_nodes()]).unwrap();
    let c = region_inequality_check_with(&d.regions[0], 0.25, &u, &p).unwrap();
    assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
}

fn region_constants(d: &Decomposition) -> Vec<f64> {
    d.regions.iter().map(|r| r.constant().unwrap()).collect()
}

#[test]
fn regional_inequalities_hold_for_the_weighted_maximizer() {
    let p = Polyhedron::unit_box();
    let m = triangulate(&p, 0.125).unwrap();
    let d = build_decomposition(&p).unwrap();
    let v = variational_kappa(&m, &WeightField::eta(&p)).unwrap();
    let u = FemField::new(&m, v.maximizer.clone()).unwrap();
    for (r, c) in d.regions.iter().zip(region_constants(&d)) {
        let chk = region_inequality_check_with(r, c, &u, &p).unwrap();
        assert!(
            chk.lhs > 0.0 && chk.lhs <= chk.rhs,
            "{}: {chk:?}",
            r.label()
        );
    }
}

#[test]
fn regional_inequalities_hold_for_random_fields_on_l_prism() {
    let p = l_prism();
    let m = triangulate(&p, 0.25).unwrap();
    let d = build_decomposition(&p).unwrap();
    let consts = region_constants(&d);
    for seed in 0..100 {
        let u = FemField::random_zero_trace(&m, seed);
        for (r, &c) in d.regions.iter().zip(&consts) {
            let chk = region_inequality_check_with(r, c, &u, &p).unwrap();
            assert!(chk.lhs <= chk.rhs, "seed {seed} {}: {chk:?}", r.label());
        }
    }
}

#[test]
fn region_outside_mesh_is_rejected() {
    let p = Polyhedron::unit_box();
    let d = build_decomposition(&p).unwrap();
    let far = Polyhedron::generate(Generator::Box {
        lx: 0.1,
        ly: 0.1,
        lz: 0.1,
    })
    .unwrap();
    let m = triangulate(&far, 0.05).unwrap();
    let u = FemField::new(&m, vec![0.0; m.num_nodes()]).unwrap();
    // Cylinder along the edge from (1,1,0) to (1,1,1) lies away from [0,0.1]^3.
    let r = d
        .of_kind(RegionKind::EdgeCylinder)
        .find(|r| r.origin[0] > 0.9 && r.origin[1] > 0.9)
        .unwrap();
    assert!(region_inequality_check_with(r, 0.25, &u, &p).is_err());
}

#[test]
fn certificates_regression() {
    // First certified runs at h = 1/8.
    for (p, kc, kv) in [
        (
            Polyhedron::unit_square(),
            2.0528182999756495,
            1.2466568907386633,
        ),
        (
            Polyhedron::l_shape(),
            4.8946738262599165,
            1.8741492864129157,
        ),
        (
            Polyhedron::unit_box(),
            4.952120963351842,
            1.2313063131047395,
        ),
    ] {
        let d = build_decomposition(&p).unwrap();
        let m = triangulate(&p, 0.125).unwrap();
        let c = constructive_kappa(&p, &d, &m).unwrap();
        assert!(c.passed);
        assert!(
            (c.constructive_kappa - kc).abs() < 1e-9 * kc,
            "{}",
            c.constructive_kappa
        );
        assert!(
            (c.variational_kappa.value - kv).abs() < 1e-9 * kv,
            "{}",
            c.variational_kappa.value
        );
        assert_eq!(c.terms.len(), if p.dim() == 2 { 2 } else { 4 });
        for r in &c.regions {
            match r.kind {
                RegionKind::VertexBall => assert_eq!(r.provenance, Provenance::Eigensolve),
                _ => {
                    assert_eq!(r.provenance, Provenance::Analytic);
                    let th = r.theta.unwrap();
                    assert!((r.stated_factor.unwrap() - PI / th).abs() < 1e-15);
                }
            }
        }
        // The summation bound holds for the discrete maximizer.
        let u = FemField::new(&m, c.variational_kappa.maximizer.clone()).unwrap();
        let k1 = k_norm(&u, NormSpec::domain(1, 1.0), &WeightField::eta(&p))
            .unwrap()
            .value
            .powi(2);
        let grad = assemble_stiffness(&m).form(u.values(), u.values());
        assert!(k1 <= c.constructive_kappa * grad);
    }
}

#[test]
fn box_residual_and_ball_factors() {
    let p = Polyhedron::unit_box();
    let d = build_decomposition(&p).unwrap();
    let m = triangulate(&p, 0.125).unwrap();
    let c = constructive_kappa(&p, &d, &m).unwrap();
    assert_eq!(c.residual.eta_min, 0.125);
    for r in c
        .regions
        .iter()
        .filter(|r| r.kind == RegionKind::VertexBall)
    {
        // delta/(2 epsilon) is the binding offset bound.
        assert_eq!(r.eta_ratio, Some(0.25));
        assert!((1.0 / r.constant - 12.0).abs() < 0.02 * 12.0);
    }
}

fn kappas(meshes: &[SimplicialMesh], p: &Polyhedron) -> Vec<f64> {
    meshes
        .iter()
        .map(|m| variational_kappa(m, &WeightField::eta(p)).unwrap().value)
        .collect()
}

fn nested(first: SimplicialMesh, p: &Polyhedron, n: usize) -> Vec<SimplicialMesh> {
    let mut out = vec![first];
    while out.len() < n {
        let mut m = refine_uniform(out.last().unwrap()).unwrap();
        m.attach_domain(p).unwrap();
        out.push(m);
    }
    out
}

#[test]
fn variational_kappa_on_unit_square_sequence() {
    let p = Polyhedron::unit_square();
    let k = kappas(&nested(triangulate(&p, 0.125).unwrap(), &p, 3), &p);
    assert!(k[0] >= 1.0 && k[1] >= k[0] && k[2] >= k[1], "{k:?}");
    assert!((k[2] - k[1]) / k[1] < 0.05, "{k:?}");
}

#[test]
fn variational_kappa_on_graded_l_shape_sequence() {
    let p = Polyhedron::l_shape();
    let base = refine(
        &triangulate(&p, 0.125).unwrap(),
        &GradingSpec::new(0.5, 1).unwrap(),
        &p,
    )
    .unwrap();
    let k = kappas(&nested(base, &p, 3), &p);
    assert!(k[1] >= k[0] && k[2] >= k[1], "{k:?}");
    assert!((k[2] - k[1]) / k[1] < 0.05, "{k:?}");
    // Bounded by the reentrant sector value 1 + (3/2)^2.
    assert!(k[2] < 3.25);
}

#[test]
fn discrete_inequality_holds_for_random_fields() {
    for p in [Polyhedron::l_shape(), Polyhedron::unit_box()] {
        let m = triangulate(&p, 0.125).unwrap();
        let w = WeightField::eta(&p);
        let kv = variational_kappa(&m, &w).unwrap().value;
        let k = assemble_stiffness(&m);
        for seed in 0..20 {
            let u = FemField::random_zero_trace(&m, seed);
            let lhs = k_norm(&u, NormSpec::domain(1, 1.0), &w)
                .unwrap()
                .value
                .powi(2);
            let rhs = kv * k.form(u.values(), u.values());
            assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} {rhs}");
        }
    }
}

#[test]
fn cap_constant_is_domain_monotone() {
    let oct = cap_constant_at(&SphericalPolygon::octant(), 4).unwrap();
    let half = cap_constant_at(&SphericalPolygon::hemisphere(), 4).unwrap();
    assert!(oct.value < half.value);
    let three = cap_constant_at(
        &SphericalPolygon::from_octants(&[[1., 1., 1.], [-1., 1., 1.], [-1., -1., 1.]]).unwrap(),
        4,
    )
    .unwrap();
    assert!(oct.value < three.value && three.value < half.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sector_constant_is_monotone(a in 0.01f64..std::f64::consts::TAU, b in 0.01f64..std::f64::consts::TAU) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(sector_constant(lo).unwrap() <= sector_constant(hi).unwrap());
    }
}
