use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Matrix, Point, Result};

/// A `d`-dimensional linear subspace of `R^N`, stored as its orthogonal
/// projector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane<const N: usize> {
    projector: Matrix<N>,
    dim: usize,
}

impl<const N: usize> Plane<N> {
    /// Span of the given vectors, which must be linearly independent.
    pub fn from_basis(vectors: &[Point<N>]) -> Result<Self> {
        if vectors.len() > N {
            return Err(Error::InvalidPlane(format!(
                "{} vectors cannot be independent in R^{N}",
                vectors.len()
            )));
        }
        let mut ortho: Vec<Point<N>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let scale = v.norm();
            let mut u = *v;
            // Two Gram-Schmidt passes keep the basis orthogonal to rounding.
            for _ in 0..2 {
                for e in &ortho {
                    u -= e * e.dot(&u);
                }
            }
            let norm = u.norm();
            if !(norm > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
                return Err(Error::InvalidPlane("basis vectors are dependent".into()));
            }
            ortho.push(u / norm);
        }
        Ok(Self::from_orthonormal(&ortho))
    }

    fn from_orthonormal(basis: &[Point<N>]) -> Self {
        let mut projector = Matrix::<N>::zeros();
        for e in basis {
            projector += e * e.transpose();
        }
        Self {
            projector: symmetrize(projector),
            dim: basis.len(),
        }
    }

    /// Wraps a matrix after checking symmetry, idempotence and trace.
    pub fn from_projector(projector: Matrix<N>, dim: usize) -> Result<Self> {
        let plane = Self { projector, dim };
        plane.check()?;
        Ok(plane)
    }

    /// Plane spanned by the eigenvectors of the `dim` largest eigenvalues of a
    /// symmetric matrix. Ties are broken by eigenvector index.
    pub fn dominant(matrix: &Matrix<N>, dim: usize) -> Self {
        let basis = top_eigenvectors(matrix, dim);
        Self::from_orthonormal(&basis)
    }

    /// The line through the origin spanned by `v`.
    pub fn line(v: Point<N>) -> Result<Self> {
        Self::from_basis(&[v])
    }

    pub fn projector(&self) -> &Matrix<N> {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Orthogonal projection of `v` onto the plane.
    pub fn project(&self, v: &Point<N>) -> Point<N> {
        self.projector * v
    }

    /// An orthonormal basis of the plane.
    pub fn basis(&self) -> Vec<Point<N>> {
        top_eigenvectors(&self.projector, self.dim)
    }

    /// Checks the projector invariants: symmetric to `1e-12`, idempotent to
    /// `1e-10`, trace equal to the dimension within `1e-10`.
    pub fn check(&self) -> Result<()> {
        let p = &self.projector;
        let asym = (p - p.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::InvalidPlane(format!("asymmetry {asym:.3e}")));
        }
        let idem = (p * p - p).amax();
        if idem > 1e-10 {
            return Err(Error::InvalidPlane(format!("P^2 - P = {idem:.3e}")));
        }
        let trace_gap = (p.trace() - self.dim as f64).abs();
        if trace_gap > 1e-10 {
            return Err(Error::InvalidPlane(format!("trace off by {trace_gap:.3e}")));
        }
        Ok(())
    }
}

/// Frobenius norm of the difference of the two projectors.
pub fn projector_distance<const N: usize>(p: &Plane<N>, q: &Plane<N>) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    Ok((p.projector - q.projector).norm())
}

fn symmetrize<const N: usize>(m: Matrix<N>) -> Matrix<N> {
    (m + m.transpose()) * 0.5
}

/// Unit eigenvectors of the `count` largest eigenvalues of a symmetric matrix.
pub(crate) fn top_eigenvectors<const N: usize>(m: &Matrix<N>, count: usize) -> Vec<Point<N>> {
    let dm = DMatrix::from_iterator(N, N, symmetrize(*m).iter().copied());
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .take(count)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            let v = Point::<N>::from_iterator(col.iter().copied());
            v / v.norm()
        })
        .collect()
}
