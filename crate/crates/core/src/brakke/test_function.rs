use crate::quadrature::bracketed_max;
use crate::{Error, Matrix, Point, Result};

/// A `C^2` scalar field with analytic derivatives.
pub trait ScalarField<const N: usize>: Sync {
    fn value(&self, x: &Point<N>) -> f64;
    fn gradient(&self, x: &Point<N>) -> Point<N>;
    fn hessian(&self, x: &Point<N>) -> Matrix<N>;
}

/// Sup norms of a test function and its first two derivatives. The Hessian
/// norm is the spectral norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestNorms {
    pub sup: f64,
    pub gradient: f64,
    pub hessian: f64,
}

impl TestNorms {
    pub fn lip(&self) -> f64 {
        self.gradient
    }

    /// `||phi||_inf + ||D phi||_inf`.
    pub fn c1(&self) -> f64 {
        self.sup + self.gradient
    }

    /// `||phi||_inf + ||D phi||_inf + ||D^2 phi||_inf`.
    pub fn c2(&self) -> f64 {
        self.sup + self.gradient + self.hessian
    }
}

/// Radial bump: `height` on `B(center, inner)`, zero outside
/// `B(center, outer)`, blended by the quintic smoothstep in the squared
/// radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump<const N: usize> {
    center: Point<N>,
    inner: f64,
    outer: f64,
    height: f64,
    norms: TestNorms,
}

fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t = t.clamp(0.0, 1.0);
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, ds, dds)
}

/// Builds a [`Bump`].
pub fn bump<const N: usize>(center: Point<N>, inner: f64, outer: f64, height: f64) -> Result<Bump<N>> {
    if !(inner > 0.0 && outer > inner && outer.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bump radii must satisfy 0 < inner < outer, got {inner}, {outer}"
        )));
    }
    if !(height >= 0.0 && height.is_finite()) {
        return Err(Error::InvalidArgument(format!("bump height {height} must be nonnegative")));
    }
    let mut b = Bump {
        center,
        inner,
        outer,
        height,
        norms: TestNorms {
            sup: height,
            gradient: 0.0,
            hessian: 0.0,
        },
    };
    let grad = bracketed_max(|r| b.radial(r).1.abs(), inner, outer, 4096);
    let hess = bracketed_max(
        |r| {
            let (_, _, radial, tangential) = b.radial(r);
            if N > 1 {
                radial.abs().max(tangential.abs())
            } else {
                radial.abs()
            }
        },
        inner,
        outer,
        4096,
    );
    b.norms.gradient = grad;
    b.norms.hessian = hess;
    Ok(b)
}

impl<const N: usize> Bump<N> {
    fn span(&self) -> f64 {
        self.outer * self.outer - self.inner * self.inner
    }

    fn t_of(&self, s: f64) -> f64 {
        (self.outer * self.outer - s) / self.span()
    }

    /// Value, radial derivative, and the radial and tangential Hessian
    /// eigenvalues at radius `r`.
    fn radial(&self, r: f64) -> (f64, f64, f64, f64) {
        let span = self.span();
        let (s, ds, dds) = smoothstep(self.t_of(r * r));
        let h = self.height;
        let tangential = -2.0 * h * ds / span;
        let radial = h * 4.0 * r * r * dds / (span * span) + tangential;
        (h * s, -2.0 * h * r * ds / span, radial, tangential)
    }

    pub fn center(&self) -> Point<N> {
        self.center
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn support_radius(&self) -> f64 {
        self.outer
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn norms(&self) -> TestNorms {
        self.norms
    }

    pub fn is_nonnegative(&self) -> bool {
        self.height >= 0.0
    }

    /// Whether `x` lies in the open support ball.
    pub fn in_support(&self, x: &Point<N>) -> bool {
        (x - self.center).norm_squared() < self.outer * self.outer
    }
}

impl<const N: usize> ScalarField<N> for Bump<N> {
    fn value(&self, x: &Point<N>) -> f64 {
        let s = (x - self.center).norm_squared();
        self.height * smoothstep(self.t_of(s)).0
    }

    fn gradient(&self, x: &Point<N>) -> Point<N> {
        let v = x - self.center;
        let (_, ds, _) = smoothstep(self.t_of(v.norm_squared()));
        v * (-2.0 * self.height * ds / self.span())
    }

    fn hessian(&self, x: &Point<N>) -> Matrix<N> {
        let v = x - self.center;
        let span = self.span();
        let (_, ds, dds) = smoothstep(self.t_of(v.norm_squared()));
        let h = self.height;
        v * v.transpose() * (4.0 * h * dds / (span * span)) - Matrix::<N>::identity() * (2.0 * h * ds / span)
    }
}
