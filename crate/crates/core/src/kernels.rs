//! Radial kernel pairs `(rho, xi)` supported in the unit ball.

use crate::quadrature::{bracketed_max, bracketed_min, integrate_relative, unit_ball_volume};
use crate::{Error, Point, Result};

/// Sample count for sup norms and extrema.
const DENSE_SAMPLES: usize = 4096;

/// Sample count for the sign and positivity checks.
const CHECK_SAMPLES: usize = 1000;

/// A radial profile `f(r) = (1 - r^2)^power * p(r)` on `[0, 1)`, zero for
/// `r >= 1`, with `p` a polynomial in `r`.
///
/// The factored form keeps derivatives exact and values nonnegative near
/// `r = 1` without cancellation.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    power: u32,
    poly: Vec<f64>,
}

impl Profile {
    /// `(1 - r^2)^power * sum_i coeffs[i] r^i`.
    pub fn new(power: u32, coeffs: Vec<f64>) -> Self {
        let mut poly = coeffs;
        while poly.len() > 1 && poly.last() == Some(&0.0) {
            poly.pop();
        }
        if poly.is_empty() {
            poly.push(0.0);
        }
        Self { power, poly }
    }

    /// `(1 - r^2)^k`.
    pub fn compact_power(k: u32) -> Self {
        Self::new(k, vec![1.0])
    }

    /// The constant `c` on `[0, 1)`.
    pub fn constant(c: f64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|c| *c == 0.0)
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if !(r < 1.0) {
            return 0.0;
        }
        let mut p = 0.0;
        for c in self.poly.iter().rev() {
            p = p * r + c;
        }
        p * (1.0 - r * r).powi(self.power as i32)
    }

    /// Exact derivative on `[0, 1)`.
    pub fn derivative(&self) -> Profile {
        let dp = poly_derivative(&self.poly);
        if self.power == 0 {
            return Profile::new(0, dp);
        }
        // d/dr (1-r^2)^k p = (1-r^2)^(k-1) [ -2k r p + (1-r^2) p' ]
        let k = self.power as f64;
        let a = poly_mul(&[0.0, -2.0 * k], &self.poly);
        let b = poly_mul(&[1.0, 0.0, -1.0], &dp);
        Profile::new(self.power - 1, poly_add(&a, &b))
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        Profile::new(self.power, self.poly.iter().map(|c| c * factor).collect())
    }

    /// `r * self(r)`.
    fn times_r(&self) -> Profile {
        Profile::new(self.power, poly_mul(&[0.0, 1.0], &self.poly))
    }
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn interior_samples(count: usize) -> impl Iterator<Item = f64> {
    (1..=count).map(move |i| i as f64 / (count + 1) as f64)
}

/// The natural partner `xi(r) = -r rho'(r) / n` of `rho`.
pub fn natural_pair_from_rho(rho: &Profile, n: usize) -> Result<Profile> {
    let d_rho = rho.derivative();
    let scale = (0..=CHECK_SAMPLES)
        .map(|i| d_rho.value(i as f64 / CHECK_SAMPLES as f64).abs())
        .fold(0.0, f64::max);
    if let Some(r) = interior_samples(CHECK_SAMPLES).find(|&r| d_rho.value(r) > 1e-14 * scale) {
        return Err(Error::InvalidArgument(format!(
            "rho is increasing at r = {r}, the natural xi would be negative"
        )));
    }
    let xi = d_rho.times_r().scaled(-1.0 / n as f64);
    if xi.is_zero() {
        return Err(Error::InvalidArgument(
            "rho' vanishes identically, xi would not be positive on (0, 1)".into(),
        ));
    }
    Ok(xi)
}

/// `d * omega_d * int_0^1 f(r) r^(d-1) dr`, by adaptive quadrature to a
/// relative tolerance of `1e-12` or better.
pub fn normalization_integral<F: Fn(f64) -> f64>(f: F, d: usize) -> f64 {
    let integral = integrate_relative(|r| f(r) * r.powi(d as i32 - 1), 0.0, 1.0, 1e-13);
    d as f64 * unit_ball_volume(d) * integral
}

/// `C = d * omega_d * int_0^1 profile(r) r^(d-1) dr`.
pub fn normalization_constant(profile: &Profile, d: usize) -> f64 {
    normalization_integral(|r| profile.value(r), d)
}

/// Sup norms of the kernel derivatives on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelNorms {
    pub d_rho: f64,
    pub dd_rho: f64,
    pub d_xi: f64,
}

impl KernelNorms {
    /// Lipschitz constant of `xi`, equal to `||xi'||` for profiles vanishing
    /// at `r = 1`.
    pub fn lip_xi(&self) -> f64 {
        self.d_xi
    }
}

/// A pair of radial kernels with their derivatives and normalization
/// constants, for `d`-varifolds in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPair {
    rho: Profile,
    d_rho: Profile,
    dd_rho: Profile,
    xi: Profile,
    d_xi: Profile,
    n: usize,
    d: usize,
    c_rho: f64,
    c_xi: f64,
    norms: KernelNorms,
    natural: bool,
}

impl KernelPair {
    /// Validates and assembles a pair.
    ///
    /// `rho` must vanish to order 3 at `r = 1` (so it is `C^2` on `R^n`) with
    /// `rho'(0) = 0`; `xi` must vanish to order 2 and be positive on `(0, 1)`.
    pub fn new(rho: Profile, xi: Profile, n: usize, d: usize) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::InvalidArgument(format!("dimensions d = {d}, n = {n}")));
        }
        if rho.power < 3 {
            return Err(Error::InvalidArgument("rho must vanish to order 3 at r = 1".into()));
        }
        if xi.power < 2 {
            return Err(Error::InvalidArgument("xi must vanish to order 2 at r = 1".into()));
        }
        let d_rho = rho.derivative();
        let rho_scale = bracketed_max(|r| d_rho.value(r).abs(), 0.0, 1.0, 64);
        if d_rho.value(0.0).abs() > 1e-14 * rho_scale.max(1.0) {
            return Err(Error::InvalidArgument("rho'(0) must vanish".into()));
        }
        for r in (0..=CHECK_SAMPLES).map(|i| i as f64 / CHECK_SAMPLES as f64) {
            if rho.value(r) < 0.0 {
                return Err(Error::InvalidArgument(format!("rho is negative at r = {r}")));
            }
        }
        if let Some(r) = interior_samples(CHECK_SAMPLES).find(|&r| !(xi.value(r) > 0.0)) {
            return Err(Error::InvalidArgument(format!("xi is not positive at r = {r}")));
        }
        let natural_xi = natural_pair_from_rho(&rho, n).ok();
        let natural = natural_xi.as_ref().is_some_and(|nat| {
            (0..=CHECK_SAMPLES).all(|i| {
                let r = i as f64 / CHECK_SAMPLES as f64;
                let (a, b) = (nat.value(r), xi.value(r));
                // natural up to a positive multiple
                (a * xi.value(0.5) - b * nat.value(0.5)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300)
            })
        });
        let c_rho = normalization_constant(&rho, d);
        let c_xi = normalization_constant(&xi, d);
        if !(c_rho > 0.0 && c_xi > 0.0) {
            return Err(Error::InvalidArgument("normalization constants must be positive".into()));
        }
        let dd_rho = d_rho.derivative();
        let d_xi = xi.derivative();
        let norms = KernelNorms {
            d_rho: sup_norm(&d_rho),
            dd_rho: sup_norm(&dd_rho),
            d_xi: sup_norm(&d_xi),
        };
        Ok(Self {
            rho,
            d_rho,
            dd_rho,
            xi,
            d_xi,
            n,
            d,
            c_rho,
            c_xi,
            norms,
            natural,
        })
    }

    /// `rho` with its natural partner `xi = -r rho' / n`.
    pub fn natural(rho: Profile, n: usize, d: usize) -> Result<Self> {
        let xi = natural_pair_from_rho(&rho, n)?;
        Self::new(rho, xi, n, d)
    }

    /// The natural pair of `rho = (1 - r^2)^4`, normalized.
    pub fn default_pair(n: usize, d: usize) -> Result<Self> {
        Self::natural(Profile::compact_power(4), n, d)?.normalized()
    }

    /// Pair selected by name: `"natural"` uses `rho = (1 - r^2)^k` with its
    /// natural partner, `"independent"` uses `rho = xi = (1 - r^2)^k`. Both
    /// are normalized.
    pub fn from_name(name: &str, exponent: u32, n: usize, d: usize) -> Result<Self> {
        let rho = Profile::compact_power(exponent);
        let pair = match name {
            "natural" => Self::natural(rho, n, d)?,
            "independent" => Self::new(rho.clone(), rho, n, d)?,
            other => return Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        };
        pair.normalized()
    }

    /// Both profiles divided by their normalization constants.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.c_rho > 0.0 && self.c_xi > 0.0) {
            return Err(Error::InvalidArgument("zero normalization constant".into()));
        }
        Self::new(
            self.rho.scaled(1.0 / self.c_rho),
            self.xi.scaled(1.0 / self.c_xi),
            self.n,
            self.d,
        )
    }

    /// The same pair with both profiles multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rho.scaled(factor), self.xi.scaled(factor), self.n, self.d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn c_rho(&self) -> f64 {
        self.c_rho
    }

    pub fn c_xi(&self) -> f64 {
        self.c_xi
    }

    /// Prefactor `C_xi / C_rho` making `H_eps` invariant under separate
    /// rescalings of `rho` and `xi`; equal to 1 for a normalized pair.
    pub fn curvature_prefactor(&self) -> f64 {
        self.c_xi / self.c_rho
    }

    pub fn norms(&self) -> KernelNorms {
        self.norms
    }

    /// Whether `xi` is a positive multiple of `-r rho' / n`.
    pub fn is_natural(&self) -> bool {
        self.natural
    }

    pub fn rho_profile(&self) -> &Profile {
        &self.rho
    }

    pub fn xi_profile(&self) -> &Profile {
        &self.xi
    }

    #[inline]
    pub fn rho(&self, r: f64) -> f64 {
        self.rho.value(r)
    }

    #[inline]
    pub fn d_rho(&self, r: f64) -> f64 {
        self.d_rho.value(r)
    }

    #[inline]
    pub fn dd_rho(&self, r: f64) -> f64 {
        self.dd_rho.value(r)
    }

    #[inline]
    pub fn xi(&self, r: f64) -> f64 {
        self.xi.value(r)
    }

    #[inline]
    pub fn d_xi(&self, r: f64) -> f64 {
        self.d_xi.value(r)
    }

    /// `rho_eps(r) = eps^-n rho(r / eps)`.
    pub fn rho_eps(&self, r: f64, eps: f64) -> f64 {
        self.rho(r / eps) / eps.powi(self.n as i32)
    }

    /// `xi_eps(r) = eps^-n xi(r / eps)`.
    pub fn xi_eps(&self, r: f64, eps: f64) -> f64 {
        self.xi(r / eps) / eps.powi(self.n as i32)
    }

    /// `grad rho_eps(w) = eps^(-n-1) rho'(|w| / eps) w / |w|`, zero at `w = 0`.
    pub fn grad_rho_eps<const N: usize>(&self, w: &Point<N>, eps: f64) -> Point<N> {
        let r = w.norm();
        if r == 0.0 {
            return Point::<N>::zeros();
        }
        w * (self.d_rho(r / eps) / (eps.powi(self.n as i32 + 1) * r))
    }

    /// `beta = min { xi(s) : s in [c0^(-2/d) / 4, 1/2] }`.
    pub fn beta(&self, c0: f64) -> Result<f64> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidArgument(format!("Ahlfors constant {c0}")));
        }
        let lo = c0.powf(-2.0 / self.d as f64) / 4.0;
        if lo >= 0.5 {
            return Ok(self.xi(0.5));
        }
        let min = bracketed_min(|s| self.xi(s), lo, 0.5, DENSE_SAMPLES);
        Ok(min.min(self.xi(lo)).min(self.xi(0.5)))
    }
}

fn sup_norm(p: &Profile) -> f64 {
    bracketed_max(|r| p.value(r).abs(), 0.0, 1.0, DENSE_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives_are_exact() {
        let rho = Profile::compact_power(4);
        let d = rho.derivative();
        let dd = d.derivative();
        for r in [0.0, 0.2, 0.5, 0.9] {
            let s: f64 = 1.0 - r * r;
            assert!((d.value(r) + 8.0 * r * s.powi(3)).abs() < 1e-15);
            let exact = -8.0 * s.powi(3) + 48.0 * r * r * s * s;
            assert!((dd.value(r) - exact).abs() < 1e-14);
        }
        assert_eq!(rho.value(1.0), 0.0);
        assert_eq!(rho.value(1.5), 0.0);
    }

    #[test]
    fn natural_xi_closed_form() {
        let xi = natural_pair_from_rho(&Profile::compact_power(4), 2).unwrap();
        for r in [0.1, 0.4, 0.8] {
            let s: f64 = 1.0 - r * r;
            assert!((xi.value(r) - 4.0 * r * r * s.powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_rho_has_no_natural_partner() {
        assert!(natural_pair_from_rho(&Profile::constant(1.0), 2).is_err());
    }

    #[test]
    fn increasing_rho_is_rejected() {
        let rho = Profile::new(3, vec![0.0, 0.0, 1.0]);
        assert!(natural_pair_from_rho(&rho, 2).is_err());
    }

    #[test]
    fn normalization_constants() {
        assert_eq!(normalization_constant(&Profile::constant(0.0), 1), 0.0);
        let c = normalization_constant(&Profile::compact_power(4), 1);
        assert!((c - 256.0 / 315.0).abs() < 1e-14);
        let c = normalization_constant(&Profile::constant(1.0), 2);
        assert!((c - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn nonzero_slope_at_origin_is_rejected() {
        // (1 - r^2)^3 (1 - r) has rho'(0) = -1
        let rho = Profile::new(3, vec![1.0, -1.0]);
        let xi = Profile::compact_power(3);
        assert!(KernelPair::new(rho, xi, 2, 1).is_err());
    }

    #[test]
    fn default_pair_is_natural_and_normalized() {
        let k = KernelPair::default_pair(2, 1).unwrap();
        assert!(k.is_natural());
        assert!((k.c_rho() - 1.0).abs() < 1e-12);
        assert!((k.c_xi() - 1.0).abs() < 1e-12);
        let ind = KernelPair::from_name("independent", 4, 2, 1).unwrap();
        assert!(!ind.is_natural());
    }
}
