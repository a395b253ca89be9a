use super::test_function::ScalarField;
use crate::curvature::{CurvatureQuery, KernelEvaluator};
use crate::geometry::{projector_distance, sample_surface, AnalyticShape, WeightedSample};
use crate::kernels::KernelPair;
use crate::quadrature::{log_log_slope, CompensatedSum};
use crate::varifold::{SampledManifoldVarifold, Varifold, VolumetricVarifold};
use crate::{Error, Point, Result};

/// Empirical consistency constant of `|H - H_eps| <= C1 eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct C1Measurement {
    /// `max_eps max_y |H(y) - H_eps(y)| / eps`.
    pub ratio: f64,
    /// `(eps, max_y |H(y) - H_eps(y)|)` per scale.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares log-log slope of the errors against `eps`.
    pub slope: f64,
}

/// Measures `C1` on a shape: the sampled varifold at `resolution` is compared
/// with the exact mean curvature at the nodes of a `probe_resolution` sample.
pub fn measure_c1<const N: usize, S: AnalyticShape<N> + ?Sized>(
    shape: &S,
    kernels: &KernelPair,
    epsilons: &[f64],
    resolution: usize,
    probe_resolution: usize,
) -> Result<C1Measurement> {
    if !kernels.is_natural() {
        return Err(Error::InvalidArgument("C1 is measured with a natural kernel pair".into()));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon list".into()));
    }
    let v = SampledManifoldVarifold::new(sample_surface(shape, resolution)?);
    let probes = sample_surface(shape, probe_resolution)?;
    let exact: Vec<Point<N>> = probes
        .points()
        .iter()
        .map(|y| shape.exact_mean_curvature(y))
        .collect::<Result<_>>()?;
    let mut errors = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let ev = KernelEvaluator::new(&v, CurvatureQuery::new(kernels, eps)?)?;
        let mut worst = 0.0f64;
        for (y, h) in probes.points().iter().zip(&exact) {
            worst = worst.max((ev.mean_curvature(y)? - h).norm());
        }
        errors.push((eps, worst));
    }
    let ratio = errors.iter().map(|(e, err)| err / e).fold(0.0, f64::max);
    let slope = if errors.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = errors.iter().copied().unzip();
        log_log_slope(&x, &y)
    } else {
        f64::NAN
    };
    Ok(C1Measurement { ratio, errors, slope })
}

/// Largest `|P_i - P_j| / |x_i - x_j|` over sample pairs closer than
/// `max_distance` (distinct positions only).
pub fn measure_c2<const N: usize>(sample: &WeightedSample<N>, max_distance: f64) -> Result<f64> {
    let mut order: Vec<usize> = (0..sample.len()).collect();
    let pts = sample.points();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(a.cmp(&b)));
    let mut best = 0.0f64;
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if pts[j][0] - pts[i][0] > max_distance {
                break;
            }
            let dist = (pts[i] - pts[j]).norm();
            if dist > 0.0 && dist <= max_distance {
                let q = projector_distance(&sample.planes()[i], &sample.planes()[j])? / dist;
                best = best.max(q);
            }
        }
    }
    Ok(best)
}

/// `int phi_eps(x, W) d||V||(x)` with
/// `phi_eps(x, W) = -phi |H_eps(x, W)|^2 + grad phi . H_eps(x, W)`, summed
/// over the atoms of `V` in the support of `phi`.
pub fn phi_eps_integral<const N: usize, V, F>(
    measure: &V,
    curvature: &KernelEvaluator<'_, N>,
    phi: &F,
    support: impl Fn(&Point<N>) -> bool,
) -> Result<f64>
where
    V: Varifold<N> + ?Sized,
    F: ScalarField<N>,
{
    let mut sum = CompensatedSum::new();
    for a in measure.atoms().iter() {
        if !support(&a.position) {
            continue;
        }
        let h = curvature.mean_curvature(&a.position)?;
        let value = -phi.value(&a.position) * h.norm_squared() + phi.gradient(&a.position).dot(&h);
        sum.add(a.mass * value);
    }
    Ok(sum.value())
}

/// The three static integrals compared by the intermediate estimates on a
/// single snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticComparison {
    /// `int phi_eps(., M) d||M||`.
    pub smooth_on_smooth: f64,
    /// `int phi_eps(., M) d||V_h||`.
    pub smooth_on_volumetric: f64,
    /// `int phi_eps(., V_h) d||V_h||`.
    pub volumetric_on_volumetric: f64,
}

impl StaticComparison {
    /// Error from replacing the measure `||M||` by `||V_h||`.
    pub fn measure_gap(&self) -> f64 {
        (self.smooth_on_smooth - self.smooth_on_volumetric).abs()
    }

    /// Error from replacing `H_eps(., M)` by `H_eps(., V_h)` on `||V_h||`.
    pub fn curvature_gap(&self) -> f64 {
        (self.smooth_on_volumetric - self.volumetric_on_volumetric).abs()
    }
}

pub fn static_comparison<const N: usize, F: ScalarField<N>>(
    smooth: &SampledManifoldVarifold<N>,
    volumetric: &VolumetricVarifold<N>,
    query: CurvatureQuery<'_>,
    phi: &F,
    support: impl Fn(&Point<N>) -> bool + Copy,
) -> Result<StaticComparison> {
    let on_smooth = KernelEvaluator::new(smooth, query)?;
    let on_volumetric = KernelEvaluator::new(volumetric, query)?;
    Ok(StaticComparison {
        smooth_on_smooth: phi_eps_integral(smooth, &on_smooth, phi, support)?,
        smooth_on_volumetric: phi_eps_integral(volumetric, &on_smooth, phi, support)?,
        volumetric_on_volumetric: phi_eps_integral(volumetric, &on_volumetric, phi, support)?,
    })
}
