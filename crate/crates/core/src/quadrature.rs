//! Small numerical building blocks: compensated sums, one-dimensional
//! quadrature rules and bracketed extremum search.

use std::f64::consts::PI;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Volume of the unit ball of `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Subdivides until the Richardson estimate of the local error is below the
/// local share of `tol`, with a recursion depth cap of 50.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of `f` on `[a, b]` to a relative tolerance, falling back to an
/// absolute floor of `1e-300` when the integral vanishes.
pub fn integrate_relative<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // Coarse pass to set the scale of the absolute tolerance.
    let scale = adaptive_simpson(|x| f(x).abs(), a, b, 1e-6 * (b - a));
    let tol = (rel_tol * scale).max(1e-300);
    adaptive_simpson(f, a, b, tol)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Maximum of `f` over `[a, b]`: dense sampling at `samples` points followed
/// by golden-section refinement in the bracket around the best sample.
pub fn bracketed_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> f64 {
    let samples = samples.max(3);
    let step = (b - a) / (samples - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..samples {
        let x = if i + 1 == samples { b } else { a + step * i as f64 };
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    best.max(golden_max(&f, lo, hi))
}

/// Minimum of `f` over `[a, b]`, see [`bracketed_max`].
pub fn bracketed_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> f64 {
    -bracketed_max(|x| -f(x), a, b, samples)
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Quadrature rule in time over a uniform grid of snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeRule {
    /// Composite trapezoid, second order.
    Trapezoid,
    /// Extended rule with end corrections `3/8, 7/6, 23/24, 1, ..., 1, 23/24,
    /// 7/6, 3/8`; fourth order, needs at least six intervals.
    #[default]
    EndCorrected,
}

impl TimeRule {
    /// Weights (already multiplied by the step) for `intervals` uniform
    /// intervals of length `step`, i.e. `intervals + 1` snapshots.
    pub fn weights(self, intervals: usize, step: f64) -> Vec<f64> {
        let count = intervals + 1;
        let mut w = vec![step; count];
        match self {
            TimeRule::EndCorrected if intervals >= 6 => {
                const ENDS: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
                for (k, c) in ENDS.iter().enumerate() {
                    w[k] = c * step;
                    w[count - 1 - k] = c * step;
                }
            }
            _ => {
                w[0] = 0.5 * step;
                w[count - 1] = 0.5 * step;
            }
        }
        if intervals == 0 {
            w[0] = 0.0;
        }
        w
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeRule::Trapezoid => "trapezoid",
            TimeRule::EndCorrected => "end-corrected",
        }
    }
}

/// Least-squares slope of `log(y)` against `log(x)`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-24);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^12 is within the degree-13 exactness range
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((i - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_simpson_polynomial() {
        let v = integrate_relative(|r| (1.0 - r * r).powi(4), 0.0, 1.0, 1e-13);
        assert!((v - 128.0 / 315.0).abs() < 1e-14);
    }

    #[test]
    fn bracketed_max_finds_interior_peak() {
        let f = |r: f64| 8.0 * r * (1.0 - r * r).powi(3);
        let exact = f(1.0 / 7f64.sqrt());
        let m = bracketed_max(f, 0.0, 1.0, 4096);
        assert!((m - exact).abs() < 1e-14 * exact);
    }

    #[test]
    fn time_rules_integrate_cubics() {
        let n = 16;
        let h = 1.0 / n as f64;
        let f = |t: f64| 1.0 + t + t * t + t * t * t;
        let exact = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
        let w = TimeRule::EndCorrected.weights(n, h);
        let v: f64 = w.iter().enumerate().map(|(i, w)| w * f(i as f64 * h)).sum();
        assert!((v - exact).abs() < 1e-13);
        let w = TimeRule::Trapezoid.weights(n, h);
        let t: f64 = w.iter().enumerate().map(|(i, w)| w * f(i as f64 * h)).sum();
        assert!((t - exact).abs() > 1e-4);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.4, 0.2, 0.1];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
