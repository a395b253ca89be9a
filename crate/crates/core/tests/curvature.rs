use varifold_core::curvature::*;
use varifold_core::discretization::{discretize, Mesh};
use varifold_core::geometry::*;
use varifold_core::kernels::KernelPair;
use varifold_core::varifold::*;
use varifold_core::{Error, Point};

fn circle_probes(count: usize, radius: f64) -> Vec<Point<2>> {
    (0..count)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * (i as f64 + 0.37) / count as f64;
            Point::<2>::new(radius * a.cos(), radius * a.sin())
        })
        .collect()
}

fn max_error(v: &SampledManifoldVarifold<2>, k: &KernelPair, eps: f64, radius: f64) -> f64 {
    let ev = KernelEvaluator::new(v, CurvatureQuery::new(k, eps).unwrap()).unwrap();
    circle_probes(32, radius)
        .iter()
        .map(|y| (ev.mean_curvature(y).unwrap() + y / (radius * radius)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn circle_error_is_second_order_in_eps() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&Circle::unit(), 4096).unwrap());
    let errors: Vec<f64> = [0.4, 0.2, 0.1, 0.05].iter().map(|&e| max_error(&v, &k, e, 1.0)).collect();
    for w in errors.windows(2) {
        // halving eps quarters the error
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "{errors:?}");
    }
    assert!(errors[0] < 0.02);
}

#[test]
fn curvature_scales_inversely_with_size() {
    // doubling the circle and eps halves H_eps exactly up to sampling
    let k = KernelPair::default_pair(2, 1).unwrap();
    let small = SampledManifoldVarifold::new(sample_surface(&Circle::new(Point::<2>::zeros(), 0.5).unwrap(), 2048).unwrap());
    let large = SampledManifoldVarifold::new(sample_surface(&Circle::new(Point::<2>::zeros(), 1.0).unwrap(), 2048).unwrap());
    let es = KernelEvaluator::new(&small, CurvatureQuery::new(&k, 0.1).unwrap()).unwrap();
    let el = KernelEvaluator::new(&large, CurvatureQuery::new(&k, 0.2).unwrap()).unwrap();
    for y in circle_probes(8, 1.0) {
        let hs = es.mean_curvature(&(y * 0.5)).unwrap();
        let hl = el.mean_curvature(&y).unwrap();
        assert!((hs - hl * 2.0).norm() < 1e-10);
    }
}

#[test]
fn sphere_curvature_is_close_to_two() {
    let k = KernelPair::default_pair(3, 2).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&Sphere::unit(), 400).unwrap());
    let ev = KernelEvaluator::new(&v, CurvatureQuery::new(&k, 0.2).unwrap()).unwrap();
    for y in [Point::<3>::new(0.6, 0.0, 0.8), Point::<3>::new(0.0, -1.0, 0.0), Point::<3>::new(-0.48, 0.6, 0.64)] {
        let h = ev.mean_curvature(&y).unwrap();
        assert!((h + 2.0 * y).norm() < 0.05, "{h:?}");
    }
}

#[test]
fn torus_curvature_matches_closed_form() {
    let torus = Torus::new(Point::<3>::zeros(), 1.0, 0.4).unwrap();
    let k = KernelPair::default_pair(3, 2).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&torus, 600).unwrap());
    let ev = KernelEvaluator::new(&v, CurvatureQuery::new(&k, 0.1).unwrap()).unwrap();
    for u in [[0.3, 0.0], [1.0, std::f64::consts::PI], [2.0, 1.2], [4.0, -0.7]] {
        let y = torus.position(u);
        let exact = torus.mean_curvature_at(u);
        let h = ev.mean_curvature(&y).unwrap();
        assert!((h - exact).norm() < 0.05 * exact.norm(), "{u:?}: {h:?} vs {exact:?}");
    }
}

#[test]
fn volumetric_curvature_approaches_smooth_curvature() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let eps = 0.2;
    let sample = sample_surface(&Circle::unit(), 1 << 17).unwrap();
    let m = SampledManifoldVarifold::new(sample.clone());
    let em = KernelEvaluator::new(&m, CurvatureQuery::new(&k, eps).unwrap()).unwrap();
    let probes = circle_probes(32, 1.0);
    let mut errors = Vec::new();
    for div in [16.0, 32.0, 64.0] {
        let edge = eps / div / 2f64.sqrt();
        let mesh = Mesh::covering(Point::<2>::repeat(-1.5), Point::<2>::repeat(1.5), edge).unwrap();
        let vh = discretize(&sample, &mesh).unwrap();
        let ev = KernelEvaluator::new(&vh, CurvatureQuery::new(&k, eps).unwrap()).unwrap();
        let err = probes
            .iter()
            .map(|y| (ev.mean_curvature(y).unwrap() - em.mean_curvature(y).unwrap()).norm())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn far_atoms_do_not_change_the_result() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let sample = sample_surface(&Circle::unit(), 512).unwrap();
    let near: Vec<Atom<2>> = sample
        .iter()
        .map(|(x, p, w)| Atom { position: *x, plane: *p, mass: w })
        .collect();
    let mut with_far = near.clone();
    let far = Circle::new(Point::<2>::new(5.0, 0.0), 1.0).unwrap();
    for (x, p, w) in sample_surface(&far, 512).unwrap().iter() {
        with_far.insert(0, Atom { position: *x, plane: *p, mass: w });
    }
    let a = PointCloudVarifold::new(1, near).unwrap();
    let b = PointCloudVarifold::new(1, with_far).unwrap();
    let q = CurvatureQuery::new(&k, 0.3).unwrap();
    for y in circle_probes(16, 1.0) {
        let ha = approx_mean_curvature(&a, q, &y).unwrap();
        let hb = approx_mean_curvature(&b, q, &y).unwrap();
        assert_eq!(ha, hb);
    }
}

#[test]
fn empty_neighbourhoods_are_reported() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&Circle::unit(), 512).unwrap());
    let q = CurvatureQuery::new(&k, 0.2).unwrap();
    let points = [Point::<2>::new(1.0, 0.0), Point::<2>::new(0.0, 0.0)];
    let field = curvature_field(&v, q, &points).unwrap();
    assert!(field[0].is_ok());
    assert!(matches!(field[1].curvature, Err(Error::DenominatorTooSmall { .. })));
    let table = field_table(&field);
    assert_eq!(table.rows()[0].last().unwrap(), "ok");
    assert_eq!(table.rows()[1].last().unwrap(), "denominator-too-small");
    assert!(CurvatureQuery::new(&k, 0.0).is_err());
    assert!(CurvatureQuery::new(&k, 1.5).is_err());
}

#[test]
fn dimension_mismatches_are_rejected() {
    let k = KernelPair::default_pair(3, 2).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&Circle::unit(), 64).unwrap());
    assert!(matches!(
        KernelEvaluator::new(&v, CurvatureQuery::new(&k, 0.2).unwrap()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn regularized_terms_assemble_the_curvature() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let v = SampledManifoldVarifold::new(sample_surface(&Circle::unit(), 1024).unwrap());
    let q = CurvatureQuery::new(&k, 0.25).unwrap();
    let y = Point::<2>::new(0.8, 0.6);
    let num = regularized_first_variation(&v, q, &y).unwrap();
    let den = regularized_mass(&v, q, &y).unwrap();
    let h = approx_mean_curvature(&v, q, &y).unwrap();
    assert!((h + num * (k.curvature_prefactor() / den)).norm() < 1e-14);
}
