// Hand values keep all their digits.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use varifold_core::brakke::*;
use varifold_core::curvature::CurvatureQuery;
use varifold_core::discretization::{discretize, Mesh};
use varifold_core::flow::{uniform_grid, FlowTrajectory};
use varifold_core::geometry::*;
use varifold_core::kernels::KernelPair;
use varifold_core::quadrature::TimeRule;
use varifold_core::varifold::SampledManifoldVarifold;
use varifold_core::{Error, Matrix, Point};

// Hand evaluation with 30-digit arithmetic of the closed forms for d = 1,
// C0 = 2.1, C1 = 0.25, C2 = sqrt(2), lambda_max = 1, mass0 = 2 pi, T = 0.125,
// ||phi||_C1 = 3.5 and the normalized default kernel pair.
const HAND_BETA: f64 = 0.03133066543641301043563;
const HAND_GAMMA_BOUNDS: [f64; 4] = [
    0.02310536044362292052,
    1.0,
    1.951286103575474418e-4,
    1.250383938453344314e-4,
];
const HAND_GAMMA: f64 = 6.251919692266721568e-5;
const HAND_LEDGER: [(&str, f64); 10] = [
    ("c3", 3.5342917352885173933),
    ("c4", 11194947142508.506429),
    ("c5", 5276.6724929530688688),
    ("c6", 84406112.77856163025),
    ("c7", 0.0018649205616912506212),
    ("c8", 1168393782590.7140111),
    ("c9", 0.015665332718206505218),
    ("c10", 5033963.2289685260991),
    ("C", 12363340925102.754732),
    ("C_prime", 1545417615651.9815084),
];

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fixed_inputs() -> LedgerInputs {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let beta = k.beta(2.1).unwrap();
    let gamma = gamma_feasible(2.1, 1.0, beta, k.norms().lip_xi(), 1, DEFAULT_GAMMA_FLOOR).unwrap();
    LedgerInputs {
        d: 1,
        c0: 2.1,
        c1: 0.25,
        c2: 2f64.sqrt(),
        gamma: gamma.gamma,
        beta,
        lambda_max: 1.0,
        mass0: 2.0 * PI,
        t_final: 0.125,
        kernel: k.norms(),
        phi_c1: 3.5,
    }
}

#[test]
fn gamma_bounds_match_hand_evaluation() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let beta = k.beta(2.1).unwrap();
    assert!(relative(beta, HAND_BETA) < 1e-12);
    let g = gamma_feasible(2.1, 1.0, beta, k.norms().lip_xi(), 1, DEFAULT_GAMMA_FLOOR).unwrap();
    for (got, want) in g.bounds.iter().zip(HAND_GAMMA_BOUNDS) {
        assert!(relative(*got, want) < 1e-10, "{got} vs {want}");
    }
    assert!(relative(g.gamma, HAND_GAMMA) < 1e-10);
    assert_eq!(g.binding, GammaBound::Strict);
    // the Ahlfors bound alone: (8 (1 + 2.1^2))^-1
    assert!((g.bounds[0] - 0.0231054).abs() < 1e-7);
}

#[test]
fn ledger_matches_hand_evaluation() {
    let ledger = constants_ledger(fixed_inputs()).unwrap();
    let entries = ledger.entries();
    for (name, want) in HAND_LEDGER {
        let got = entries.iter().find(|(n, _)| *n == name).unwrap().1;
        assert!(relative(got, want) < 1e-10, "{name}: {got} vs {want}");
    }
    let table = ledger.to_table();
    assert_eq!(table.header(), ["name", "value"]);
    assert_eq!(table.rows().len(), entries.len());
}

#[test]
fn ledger_identities() {
    let inputs = fixed_inputs();
    let ledger = constants_ledger(inputs).unwrap();
    // d = 1: c7 = beta C0^-1 2^-3
    assert!(relative(ledger.c7, inputs.beta / inputs.c0 / 8.0) < 1e-15);
    assert!(relative(ledger.big_c_prime, inputs.mass0 * (2.0 + inputs.c1) + ledger.big_c * inputs.t_final) < 1e-15);
    assert!(relative(ledger.big_c, ledger.c3 + ledger.c4 + ledger.c8) < 1e-15);
    // the halved strict bound leaves c9 = beta / 2
    assert!(relative(ledger.c9, inputs.beta / 2.0) < 1e-12);
    let mut doubled = inputs;
    doubled.kernel.d_rho *= 2.0;
    let other = constants_ledger(doubled).unwrap();
    assert!(relative(other.c5, 2.0 * ledger.c5) < 1e-15);
}

#[test]
fn ledger_rejects_infeasible_inputs() {
    let mut inputs = fixed_inputs();
    inputs.gamma = 1.0;
    assert!(matches!(constants_ledger(inputs), Err(Error::GammaInfeasible { .. })));
    let mut inputs = fixed_inputs();
    inputs.c0 = 0.9;
    assert!(constants_ledger(inputs).is_err());
    assert!(matches!(
        gamma_feasible(2.1, 1.0, 1e-12, 3.5, 1, DEFAULT_GAMMA_FLOOR),
        Err(Error::GammaInfeasible { .. })
    ));
}

#[test]
fn bump_derivatives_match_finite_differences() {
    let b = bump(Point::<2>::new(0.2, -0.1), 0.4, 1.1, 1.7).unwrap();
    let step = 1e-5;
    for i in 0..40 {
        let a = 0.7 * i as f64;
        let r = 0.3 + 0.9 * i as f64 / 40.0;
        let x = b.center() + Point::<2>::new(a.cos(), a.sin()) * r;
        let mut grad = Point::<2>::zeros();
        let mut hess = Matrix::<2>::zeros();
        for k in 0..2 {
            let mut e = Point::<2>::zeros();
            e[k] = step;
            grad[k] = (b.value(&(x + e)) - b.value(&(x - e))) / (2.0 * step);
            let dg = (b.gradient(&(x + e)) - b.gradient(&(x - e))) / (2.0 * step);
            hess.set_column(k, &dg);
        }
        assert!((grad - b.gradient(&x)).norm() < 1e-7);
        assert!((hess - b.hessian(&x)).norm() < 1e-6);
        assert!(b.gradient(&x).norm() <= b.norms().gradient * (1.0 + 1e-9));
        let spectral = b.hessian(&x).symmetric_eigenvalues().amax();
        assert!(spectral <= b.norms().hessian * (1.0 + 1e-9));
    }
}

#[test]
fn c2_of_circles_is_root_two_over_radius() {
    for radius in [0.5, 1.0, 2.0] {
        let c = Circle::new(Point::<2>::new(0.3, 0.0), radius).unwrap();
        let sample = sample_surface(&c, 4096).unwrap();
        let c2 = measure_c2(&sample, 0.1).unwrap();
        assert!(relative(c2, 2f64.sqrt() / radius) < 1e-3, "R = {radius}: {c2}");
    }
    let line = Plane::line(Point::<2>::x()).unwrap();
    let points: Vec<Point<2>> = (0..50).map(|i| Point::<2>::new(i as f64 * 0.01, 0.0)).collect();
    let flat = WeightedSample::new(1, points, vec![line; 50], vec![0.01; 50]).unwrap();
    assert_eq!(measure_c2(&flat, 0.1).unwrap(), 0.0);
}

#[test]
fn c1_tracks_curvature() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let eps = [0.2, 0.1, 0.05];
    let unit = measure_c1(&Circle::unit(), &k, &eps, 4096, 32).unwrap();
    // the error is second order, so err / eps halves with eps
    assert!(unit.slope > 1.8, "{unit:?}");
    for w in unit.errors.windows(2) {
        assert!(w[0].1 / w[0].0 > w[1].1 / w[1].0);
    }
    // doubling the shape and eps: the error scales as kappa^3 eps^2, so the
    // ratio err / eps drops by 4
    let big = Circle::new(Point::<2>::zeros(), 2.0).unwrap();
    let doubled = measure_c1(&big, &k, &[0.4, 0.2, 0.1], 4096, 32).unwrap();
    assert!(relative(doubled.ratio, unit.ratio / 4.0) < 1e-6, "{} vs {}", doubled.ratio, unit.ratio);
    // thinner torus tubes have larger curvature and a larger ratio
    let k3 = KernelPair::default_pair(3, 2).unwrap();
    let fat = Torus::new(Point::<3>::zeros(), 1.0, 0.5).unwrap();
    let thin = Torus::new(Point::<3>::zeros(), 1.0, 0.3).unwrap();
    let e3 = [0.15, 0.1];
    let c_fat = measure_c1(&fat, &k3, &e3, 400, 24).unwrap();
    let c_thin = measure_c1(&thin, &k3, &e3, 400, 24).unwrap();
    assert!(c_thin.ratio > c_fat.ratio, "{} vs {}", c_thin.ratio, c_fat.ratio);
    let independent = KernelPair::from_name("independent", 4, 2, 1).unwrap();
    assert!(measure_c1(&Circle::unit(), &independent, &eps, 512, 8).is_err());
}

#[test]
fn static_intermediate_bounds_hold() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let eps = 0.3;
    let sample = sample_surface(&Circle::unit(), 1 << 15).unwrap();
    let smooth = SampledManifoldVarifold::new(sample.clone());
    let phi = bump(Point::<2>::new(0.7, 0.3), 0.2, 0.6, 1.0).unwrap();
    let ledger = constants_ledger(fixed_inputs()).unwrap();
    let mut gaps = Vec::new();
    for edge in [0.02, 0.01, 0.005] {
        let mesh = Mesh::covering(Point::<2>::repeat(-1.5), Point::<2>::repeat(1.5), edge).unwrap();
        let vh = discretize(&sample, &mesh).unwrap();
        let h = vh.h();
        let cmp = static_comparison(&smooth, &vh, CurvatureQuery::new(&k, eps).unwrap(), &phi, |x| phi.in_support(x)).unwrap();
        let scale = h / eps.powi(3);
        assert!(cmp.measure_gap() <= ledger.c4 * phi.norms().c2() * scale);
        assert!(cmp.curvature_gap() <= ledger.c8 * phi.norms().c1() * scale);
        gaps.push(cmp.measure_gap() + cmp.curvature_gap());
    }
    assert!(gaps[2] < gaps[0], "{gaps:?}");
}

fn circle_setup<'a>(k: &'a KernelPair, eps: f64, edge: f64, intervals: usize, variant: ResidualVariant) -> ResidualSetup<'a, 2> {
    ResidualSetup {
        kernels: k,
        epsilon: eps,
        edge,
        domain: (Point::<2>::repeat(-1.5), Point::<2>::repeat(1.5)),
        phi: bump(Point::<2>::zeros(), 1.1, 1.4, 1.0).unwrap(),
        first: 0,
        last: intervals,
        time_rule: TimeRule::EndCorrected,
        gamma: HAND_GAMMA,
        policy: HypothesisPolicy::Record,
        variant,
        samples_per_cell: 32,
        constants: BoundConstants { c1: 0.03, big_c: 1.0, big_c_prime: 1.0 },
    }
}

fn circle_flow(intervals: usize) -> FlowTrajectory<2> {
    FlowTrajectory::shrinking_circle(Point::<2>::zeros(), 1.0, &uniform_grid(0.0, 0.125, intervals)).unwrap()
}

#[test]
fn exact_control_residual_is_time_quadrature_error() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let mut previous = f64::INFINITY;
    for intervals in [64, 128, 256] {
        let setup = circle_setup(&k, 0.4, 0.01, intervals, ResidualVariant::ExactControl);
        let r = brakke_residual(&circle_flow(intervals), &setup).unwrap();
        assert!(r.residual <= 1e-6);
        assert!(previous / r.residual >= 3.5);
        previous = r.residual;
        assert_eq!(r.integral_phi_eps, -r.integral);
        assert_eq!(r.recomputed_residual(), r.residual);
        assert!(!r.hypothesis_holds);
    }
    assert!(previous < 1e-8);
    // trapezoid is second order
    let mut setup = circle_setup(&k, 0.4, 0.01, 64, ResidualVariant::ExactControl);
    setup.time_rule = TimeRule::Trapezoid;
    let r = brakke_residual(&circle_flow(64), &setup).unwrap();
    assert!((r.residual - 1.07778e-6).abs() < 1e-10, "{}", r.residual);
}

#[test]
fn discrete_residual_report_is_consistent() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let setup = circle_setup(&k, 0.4, 0.02, 8, ResidualVariant::Discrete);
    let r = brakke_residual(&circle_flow(8), &setup).unwrap();
    assert_eq!(r.snapshots.len(), 9);
    // phi is 1 on the flow, so the mass term is the total mass
    for s in &r.snapshots {
        assert!(relative(s.mass_phi, s.exact_mass) < 1e-12);
        assert!(relative(s.total_mass, s.exact_mass) < 1e-12);
    }
    assert!(r.mass_t2 <= r.mass_t1);
    assert!(r.residual < 0.1);
    assert_eq!(r.bound, r.bound_distance_term + r.bound_mass_drop_term + r.bound_main_term);
    assert_eq!(r.weak_bound, r.scale() * setup.phi.norms().c2());
    let kv = r.to_key_values();
    assert!(kv.contains("hypothesis_holds = false"));
    let mut table = ResidualReport::table_header();
    r.push_row(&mut table);
    assert_eq!(table.rows()[0].len(), table.header().len());
    // smoothed variant sits between the discrete and exact ones
    let setup = circle_setup(&k, 0.4, 0.02, 8, ResidualVariant::SmoothedExactMeasure);
    let smoothed = brakke_residual(&circle_flow(8), &setup).unwrap();
    assert!(smoothed.residual < 0.1);
}

#[test]
fn residual_preconditions() {
    let k = KernelPair::default_pair(2, 1).unwrap();
    let mut setup = circle_setup(&k, 0.4, 0.02, 8, ResidualVariant::Discrete);
    setup.policy = HypothesisPolicy::Enforce;
    assert!(matches!(
        brakke_residual(&circle_flow(8), &setup),
        Err(Error::HypothesisViolated { .. })
    ));
    let mut setup = circle_setup(&k, 0.4, 0.02, 8, ResidualVariant::Discrete);
    setup.last = 9;
    assert!(brakke_residual(&circle_flow(8), &setup).is_err());
    let mut setup = circle_setup(&k, 0.4, 0.02, 8, ResidualVariant::Discrete);
    setup.domain = (Point::<2>::repeat(-0.5), Point::<2>::repeat(0.5));
    assert!(brakke_residual(&circle_flow(8), &setup).is_err());
    // polylines have no exact curvature
    let poly = varifold_core::flow::Polyline::regular(Point::<2>::zeros(), 1.0, 64, 0.0).unwrap();
    let traj = FlowTrajectory::curve_shortening(poly, 1e-4, 2, 3).unwrap();
    let setup = circle_setup(&k, 0.4, 0.02, 2, ResidualVariant::ExactControl);
    assert!(brakke_residual(&traj, &setup).is_err());
}
