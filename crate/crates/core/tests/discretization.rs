use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varifold_core::discretization::*;
use varifold_core::geometry::*;
use varifold_core::varifold::*;
use varifold_core::Point;

fn circle_box() -> (Point<2>, Point<2>) {
    (Point::<2>::new(-1.5, -1.5), Point::<2>::new(1.5, 1.5))
}

#[test]
fn cell_masses_add_up_to_the_sampled_measure() {
    let circle = sample_surface(&Circle::unit(), 4096).unwrap();
    let sphere = sample_surface(&Sphere::unit(), 256).unwrap();
    let torus = sample_surface(&Torus::new(Point::<3>::zeros(), 1.0, 0.3).unwrap(), 256).unwrap();
    for edge in [0.1, 0.05, 0.025] {
        let mesh = Mesh::covering(circle_box().0, circle_box().1, edge).unwrap();
        let vh = discretize(&circle, &mesh).unwrap();
        let cells: f64 = vh.cells().iter().map(|(_, c)| c.mass).sum();
        assert!((cells - circle.total_weight()).abs() <= 1e-12 * circle.total_weight());
        assert!((vh.mass_total() - 2.0 * PI).abs() <= 1e-12 * 2.0 * PI);
        for sample in [&sphere, &torus] {
            let lo = Point::<3>::repeat(-1.5);
            let mesh = Mesh::covering(lo, -lo, edge).unwrap();
            let vh = discretize(sample, &mesh).unwrap();
            assert!((vh.mass_total() - sample.total_weight()).abs() <= 1e-12 * sample.total_weight());
        }
    }
}

#[test]
fn measure_error_is_bounded_by_h_lip_mass() {
    // 20 seeded Lipschitz test functions A sin(w . x + b), lip = |A| |w|
    let sample = sample_surface(&Circle::unit(), 4096).unwrap();
    let m = SampledManifoldVarifold::new(sample.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tests: Vec<(f64, Point<2>, f64)> = (0..20)
        .map(|_| {
            let a = rng.gen_range(-2.0..2.0);
            let w = Point::<2>::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
            (a, w, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    for edge in [0.1, 0.05, 0.025] {
        let mesh = Mesh::covering(circle_box().0, circle_box().1, edge).unwrap();
        let vh = discretize(&sample, &mesh).unwrap();
        let h = vh.h();
        for &(a, w, b) in &tests {
            let phi = |x: &Point<2>| a * (w.dot(x) + b).sin();
            let gap = (m.mass_apply(phi) - vh.mass_apply(phi)).abs();
            assert!(gap <= h * a.abs() * w.norm() * 2.0 * PI, "edge {edge}: {gap}");
        }
    }
}

#[test]
fn fitted_planes_follow_the_tangent() {
    let sample = sample_surface(&Circle::unit(), 4096).unwrap();
    let mesh = Mesh::covering(circle_box().0, circle_box().1, 0.05).unwrap();
    let vh = discretize(&sample, &mesh).unwrap();
    let quality = fit_quality_per_cell(&sample, &vh).unwrap();
    assert_eq!(quality.len(), vh.cells().len());
    // the tangent turns by at most h across a cell of the unit circle
    let worst = quality.iter().map(|(_, q)| *q).fold(0.0, f64::max);
    assert!(worst <= 2f64.sqrt() * vh.h(), "{worst}");
    assert!(tangent_fit_quality(&[], &[], &Plane::line(Point::<2>::x()).unwrap()).is_err());
}

#[test]
fn flat_sample_gives_exact_planes() {
    let n = 200;
    let points: Vec<Point<2>> = (0..n).map(|i| Point::<2>::new(-0.9 + 1.8 * i as f64 / n as f64, 0.31)).collect();
    let line = Plane::line(Point::<2>::x()).unwrap();
    let sample = WeightedSample::new(1, points, vec![line; n], vec![1.8 / n as f64; n]).unwrap();
    let mesh = Mesh::covering(Point::<2>::repeat(-1.0), Point::<2>::repeat(1.0), 0.1).unwrap();
    let vh = discretize(&sample, &mesh).unwrap();
    for (_, cell) in vh.cells() {
        assert!(projector_distance(&cell.plane, &line).unwrap() < 1e-14);
    }
}

#[test]
fn points_outside_the_mesh_are_rejected() {
    let sample = sample_surface(&Circle::new(Point::<2>::new(2.0, 0.0), 1.0).unwrap(), 64).unwrap();
    let mesh = Mesh::covering(circle_box().0, circle_box().1, 0.1).unwrap();
    assert!(discretize(&sample, &mesh).is_err());
}

#[test]
fn upper_faces_belong_to_the_last_cell() {
    let mesh = Mesh::covering(Point::<2>::zeros(), Point::<2>::repeat(1.0), 0.25).unwrap();
    assert_eq!(mesh.counts(), [4, 4]);
    assert_eq!(mesh.cell_of(&Point::<2>::repeat(1.0)).unwrap(), [3, 3]);
    assert_eq!(mesh.cell_of(&Point::<2>::zeros()).unwrap(), [0, 0]);
    assert!(mesh.cell_of(&Point::<2>::new(1.0 + 1e-9, 0.5)).is_err());
}

proptest! {
    #[test]
    fn discretization_conserves_mass(seed in 0u64..1000, count in 1usize..300, edge in 0.02f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::new();
        let mut planes = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..count {
            points.push(Point::<2>::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let a: f64 = rng.gen_range(0.0..PI);
            planes.push(Plane::line(Point::<2>::new(a.cos(), a.sin())).unwrap());
            weights.push(rng.gen_range(1e-3..1.0));
        }
        let sample = WeightedSample::new(1, points, planes, weights).unwrap();
        let mesh = Mesh::covering(Point::<2>::repeat(-1.0), Point::<2>::repeat(1.0), edge).unwrap();
        let vh = discretize(&sample, &mesh).unwrap();
        let total = sample.total_weight();
        prop_assert!((vh.mass_total() - total).abs() <= 1e-12 * total);
        for (_, cell) in vh.cells() {
            prop_assert!(cell.mass > 0.0);
            prop_assert!(cell.plane.check().is_ok());
        }
    }

    #[test]
    fn mass_functional_is_linear_and_monotone(a in -3.0f64..3.0, b in -3.0f64..3.0, shift in 0.0f64..2.0) {
        let sample = sample_surface(&Circle::unit(), 256).unwrap();
        let mesh = Mesh::covering(circle_box().0, circle_box().1, 0.1).unwrap();
        let vh = discretize(&sample, &mesh).unwrap();
        let f = |x: &Point<2>| x[0] * x[1];
        let g = |x: &Point<2>| x[0].cos();
        let combined = vh.mass_apply(|x| a * f(x) + b * g(x));
        let separate = a * vh.mass_apply(f) + b * vh.mass_apply(g);
        prop_assert!((combined - separate).abs() < 1e-12);
        // g + shift >= g pointwise
        prop_assert!(vh.mass_apply(|x| g(x) + shift) >= vh.mass_apply(g));
    }
}
