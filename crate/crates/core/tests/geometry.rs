use std::f64::consts::PI;

use proptest::prelude::*;
use varifold_core::geometry::*;
use varifold_core::{Error, Point};

fn angle_line(a: f64) -> Plane<2> {
    Plane::line(Point::<2>::new(a.cos(), a.sin())).unwrap()
}

#[test]
fn orthogonal_lines_are_root_two_apart() {
    let d = projector_distance(&angle_line(0.0), &angle_line(PI / 2.0)).unwrap();
    assert!((d - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn planes_of_different_dimension_are_rejected() {
    let line = Plane::line(Point::<3>::x()).unwrap();
    let plane = Plane::from_basis(&[Point::<3>::x(), Point::<3>::y()]).unwrap();
    assert!(matches!(
        projector_distance(&line, &plane),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn line_distance_matches_rotation_angle() {
    // |P_a - P_0|_F = sqrt(2) |sin a|
    for i in 0..64 {
        let a = i as f64 * 0.1;
        let d = projector_distance(&angle_line(a), &angle_line(0.0)).unwrap();
        assert!((d - 2f64.sqrt() * a.sin().abs()).abs() < 1e-14, "angle {a}");
    }
}

#[test]
fn total_measures_match_closed_forms() {
    let cases: Vec<(f64, f64)> = vec![
        (Circle::new(Point::<2>::new(0.3, -0.2), 0.7).unwrap().total_measure(), 2.0 * PI * 0.7),
        (Sphere::unit().total_measure(), 4.0 * PI),
        (Torus::new(Point::<3>::zeros(), 2.0, 0.5).unwrap().total_measure(), 4.0 * PI * PI),
    ];
    for (got, want) in cases {
        assert!((got - want).abs() <= 1e-14 * want);
    }
    // circle as a degenerate ellipse
    let e = Ellipse::new(Point::<2>::zeros(), 1.5, 1.5).unwrap();
    assert!((e.total_measure() - 3.0 * PI).abs() < 1e-13);
    // Ramanujan's second approximation is accurate to ~1e-10 at this eccentricity
    let (a, b) = (2.0f64, 1.0f64);
    let hh = ((a - b) / (a + b)).powi(2);
    let ramanujan = PI * (a + b) * (1.0 + 3.0 * hh / (10.0 + (4.0 - 3.0 * hh).sqrt()));
    let e = Ellipse::new(Point::<2>::zeros(), a, b).unwrap();
    assert!((e.total_measure() - ramanujan).abs() < 1e-7);
}

#[test]
fn sample_weights_sum_to_total_measure() {
    let shapes: Vec<AnyShape> = vec![
        ShapeSpec::Circle { center: [0.0, 0.0], radius: 1.0 }.build().unwrap(),
        ShapeSpec::Sphere { center: [0.0, 0.0, 0.0], radius: 1.0 }.build().unwrap(),
        ShapeSpec::Torus { center: [0.0, 0.0, 0.0], major: 1.0, minor: 0.3 }.build().unwrap(),
    ];
    for shape in shapes {
        let total = match &shape {
            AnyShape::Planar(s) => sample_surface(s.as_ref(), 200).unwrap().total_weight(),
            AnyShape::Spatial(s) => sample_surface(s.as_ref(), 64).unwrap().total_weight(),
        };
        assert!((total - shape.total_measure()).abs() <= 1e-12 * shape.total_measure());
    }
}

#[test]
fn sphere_curvature_points_inward_with_norm_two() {
    let s = Sphere::unit();
    let sample = sample_surface(&s, 16).unwrap();
    for y in sample.points() {
        let h = s.exact_mean_curvature(y).unwrap();
        assert!((h + 2.0 * y).norm() < 1e-12);
    }
    assert!(matches!(
        s.exact_mean_curvature(&Point::<3>::new(0.0, 0.0, 1.1)),
        Err(Error::NotOnShape { .. })
    ));
}

/// Area element of the parallel surface `x + s n` by central differences of
/// the parametrization, with `n` taken from the cross product of the
/// tangents.
fn parallel_area(torus: &Torus, u: [f64; 2], s: f64) -> f64 {
    let step = 1e-5;
    let normal = |u: [f64; 2]| {
        let t = torus.tangents(u);
        t[0].cross(&t[1]).normalize()
    };
    let x = |u: [f64; 2]| torus.position(u) + normal(u) * s;
    let du = (x([u[0] + step, u[1]]) - x([u[0] - step, u[1]])) / (2.0 * step);
    let dv = (x([u[0], u[1] + step]) - x([u[0], u[1] - step])) / (2.0 * step);
    du.cross(&dv).norm()
}

#[test]
fn torus_curvature_matches_area_variation() {
    // H . n = -d/ds log(area element of the parallel surface) at s = 0
    let torus = Torus::new(Point::<3>::new(0.1, 0.0, -0.2), 1.0, 0.35).unwrap();
    let ds = 1e-4;
    for i in 0..12 {
        let u = [0.3 + i as f64 * 0.5, -1.0 + i as f64 * 0.55];
        let t = torus.tangents(u);
        let n = t[0].cross(&t[1]).normalize();
        let fd = -(parallel_area(&torus, u, ds).ln() - parallel_area(&torus, u, -ds).ln()) / (2.0 * ds);
        let h = torus.mean_curvature_at(u);
        assert!((h.dot(&n) - fd).abs() < 1e-6, "u = {u:?}: {} vs {fd}", h.dot(&n));
        // normal direction only
        assert!((h - n * h.dot(&n)).norm() < 1e-12);
    }
}

#[test]
fn circle_parameters_round_trip() {
    let c = Circle::new(Point::<2>::new(1.0, 2.0), 0.5).unwrap();
    for i in 0..20 {
        let u = [-3.0 + 0.3 * i as f64, 0.0];
        let back = c.parameters_of(&c.position(u));
        assert!((c.position(back) - c.position(u)).norm() < 1e-14);
    }
}

#[test]
fn shape_records_reject_unknown_keys() {
    let mut rec = std::collections::BTreeMap::new();
    rec.insert("radius".to_string(), 1.0);
    assert!(ShapeSpec::from_record("circle", &rec).is_ok());
    rec.insert("colour".to_string(), 1.0);
    assert!(ShapeSpec::from_record("circle", &rec).is_err());
    assert!(ShapeSpec::from_record("cube", &std::collections::BTreeMap::new()).is_err());
}

fn plane_strategy() -> impl Strategy<Value = Plane<3>> {
    (prop::array::uniform3(-1.0f64..1.0), prop::array::uniform3(-1.0f64..1.0), 1usize..=2)
        .prop_filter_map("independent", |(a, b, dim)| {
            let a = Point::<3>::from(a);
            let b = Point::<3>::from(b);
            let basis = if dim == 1 { vec![a] } else { vec![a, b] };
            Plane::from_basis(&basis).ok().filter(|_| a.cross(&b).norm() > 1e-3)
        })
}

proptest! {
    #[test]
    fn projectors_are_valid(p in plane_strategy()) {
        prop_assert!(p.check().is_ok());
        let m = p.projector();
        prop_assert!((m * m - m).norm() < 1e-12);
        prop_assert!((m.trace() - p.dim() as f64).abs() < 1e-12);
    }

    #[test]
    fn plane_distance_is_a_metric(p in plane_strategy(), q in plane_strategy(), r in plane_strategy()) {
        prop_assume!(p.dim() == q.dim() && q.dim() == r.dim());
        let pq = projector_distance(&p, &q).unwrap();
        let qp = projector_distance(&q, &p).unwrap();
        let pr = projector_distance(&p, &r).unwrap();
        let rq = projector_distance(&r, &q).unwrap();
        prop_assert!(pq >= 0.0);
        prop_assert!((pq - qp).abs() < 1e-15);
        prop_assert!(pq <= pr + rq + 1e-12);
        prop_assert!(projector_distance(&p, &p).unwrap() < 1e-15);
    }

    #[test]
    fn basis_choice_does_not_change_the_plane(a in prop::array::uniform3(-1.0f64..1.0), b in prop::array::uniform3(-1.0f64..1.0), s in 0.1f64..3.0, t in -2.0f64..2.0) {
        let a = Point::<3>::from(a);
        let b = Point::<3>::from(b);
        prop_assume!(a.cross(&b).norm() > 1e-2);
        let p = Plane::from_basis(&[a, b]).unwrap();
        let q = Plane::from_basis(&[a * s + b * t, b]).unwrap();
        prop_assert!(projector_distance(&p, &q).unwrap() < 1e-10);
    }
}
