//! Uniform meshes and the volumetric discretization `M -> V_h`.

use std::collections::BTreeMap;

use crate::geometry::{projector_distance, Plane, WeightedSample};
use crate::quadrature::CompensatedSum;
use crate::varifold::{Cell, VolumetricVarifold};
use crate::{Error, Matrix, Point, Result};

/// Integer coordinates of a mesh cell.
pub type CellIndex<const N: usize> = [i64; N];

/// Uniform cubic mesh anchored at the lower corner of a box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh<const N: usize> {
    lower: Point<N>,
    edge: f64,
    counts: [usize; N],
}

impl<const N: usize> Mesh<N> {
    /// Smallest mesh of cubes with the given edge covering `[lower, upper]`.
    pub fn covering(lower: Point<N>, upper: Point<N>, edge: f64) -> Result<Self> {
        if !(edge > 0.0 && edge.is_finite()) {
            return Err(Error::InvalidArgument(format!("mesh edge {edge}")));
        }
        let mut counts = [0usize; N];
        for i in 0..N {
            let span = upper[i] - lower[i];
            if !(span > 0.0 && span.is_finite()) {
                return Err(Error::InvalidArgument(format!("empty box along axis {i}")));
            }
            let c = (span / edge).ceil();
            if c > 1e9 {
                return Err(Error::InvalidArgument(format!("{c} cells along axis {i}")));
            }
            counts[i] = (c as usize).max(1);
        }
        Ok(Self { lower, edge, counts })
    }

    pub fn lower(&self) -> Point<N> {
        self.lower
    }

    pub fn upper(&self) -> Point<N> {
        let mut u = self.lower;
        for i in 0..N {
            u[i] += self.counts[i] as f64 * self.edge;
        }
        u
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn counts(&self) -> [usize; N] {
        self.counts
    }

    /// Cell diameter `h = edge * sqrt(N)`.
    pub fn diameter(&self) -> f64 {
        self.edge * (N as f64).sqrt()
    }

    pub fn cell_volume(&self) -> f64 {
        self.edge.powi(N as i32)
    }

    pub fn contains(&self, x: &Point<N>) -> bool {
        let u = self.upper();
        (0..N).all(|i| x[i] >= self.lower[i] && x[i] <= u[i])
    }

    pub fn has_cell(&self, index: &CellIndex<N>) -> bool {
        (0..N).all(|i| index[i] >= 0 && (index[i] as usize) < self.counts[i])
    }

    /// Index of the cell containing `x`; points on the upper faces of the box
    /// belong to the last cell.
    pub fn cell_of(&self, x: &Point<N>) -> Result<CellIndex<N>> {
        if !self.contains(x) {
            return Err(Error::OutsideMesh {
                point: x.iter().copied().collect(),
            });
        }
        let mut index = [0i64; N];
        for i in 0..N {
            let k = ((x[i] - self.lower[i]) / self.edge).floor() as i64;
            index[i] = k.clamp(0, self.counts[i] as i64 - 1);
        }
        Ok(index)
    }

    pub fn cell_lower(&self, index: &CellIndex<N>) -> Point<N> {
        let mut p = self.lower;
        for i in 0..N {
            p[i] += index[i] as f64 * self.edge;
        }
        p
    }

    pub fn cell_center(&self, index: &CellIndex<N>) -> Point<N> {
        self.cell_lower(index).add_scalar(0.5 * self.edge)
    }

    /// Midpoints of the `s^N` congruent subcells of a cell, in lexicographic
    /// order of the subcell index.
    pub fn subpoints(&self, index: &CellIndex<N>, s: usize) -> impl Iterator<Item = Point<N>> {
        let base = self.cell_lower(index);
        let step = self.edge / s as f64;
        let total = s.pow(N as u32);
        (0..total).map(move |mut k| {
            let mut p = base;
            for i in (0..N).rev() {
                p[i] += ((k % s) as f64 + 0.5) * step;
                k /= s;
            }
            p
        })
    }
}

/// Volumetric discretization of a weighted sample on a mesh.
///
/// `m_K` is the total weight of the sample points in `K` and `P_K` spans the
/// top-`d` eigenvectors of the weighted mean projector of the cell.
pub fn discretize<const N: usize>(
    sample: &WeightedSample<N>,
    mesh: &Mesh<N>,
) -> Result<VolumetricVarifold<N>> {
    let mut acc: BTreeMap<CellIndex<N>, (CompensatedSum, Vec<CompensatedSum>)> = BTreeMap::new();
    for (x, plane, w) in sample.iter() {
        let index = mesh.cell_of(x)?;
        let (mass, proj) = acc
            .entry(index)
            .or_insert_with(|| (CompensatedSum::new(), vec![CompensatedSum::new(); N * N]));
        mass.add(w);
        for (sum, p) in proj.iter_mut().zip(plane.projector().iter()) {
            sum.add(w * p);
        }
    }
    let cells = acc
        .into_iter()
        .map(|(index, (mass, proj))| {
            let m = mass.value();
            let mean = Matrix::<N>::from_iterator(proj.iter().map(|s| s.value() / m));
            (
                index,
                Cell {
                    mass: m,
                    plane: Plane::dominant(&mean, sample.dim()),
                },
            )
        })
        .collect();
    VolumetricVarifold::new(*mesh, sample.dim(), cells)
}

/// Sample indices grouped by the cell containing them.
pub fn cell_members<const N: usize>(
    sample: &WeightedSample<N>,
    mesh: &Mesh<N>,
) -> Result<BTreeMap<CellIndex<N>, Vec<usize>>> {
    let mut groups: BTreeMap<CellIndex<N>, Vec<usize>> = BTreeMap::new();
    for (j, x) in sample.points().iter().enumerate() {
        groups.entry(mesh.cell_of(x)?).or_default().push(j);
    }
    Ok(groups)
}

/// Weighted mean projector distance `sum w_j |P_j - S| / sum w_j`.
pub fn tangent_fit_quality<const N: usize>(
    planes: &[Plane<N>],
    weights: &[f64],
    fit: &Plane<N>,
) -> Result<f64> {
    if planes.is_empty() {
        return Err(Error::EmptyCell);
    }
    if planes.len() != weights.len() {
        return Err(Error::InvalidArgument("planes and weights differ in length".into()));
    }
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (p, w) in planes.iter().zip(weights) {
        num.add(w * projector_distance(p, fit)?);
        den.add(*w);
    }
    Ok(num.value() / den.value())
}

/// Fit quality of every cell of `vh`, computed from the sample that produced it.
pub fn fit_quality_per_cell<const N: usize>(
    sample: &WeightedSample<N>,
    vh: &VolumetricVarifold<N>,
) -> Result<Vec<(CellIndex<N>, f64)>> {
    let groups = cell_members(sample, vh.mesh())?;
    let mut out = Vec::with_capacity(groups.len());
    for (index, members) in groups {
        let cell = vh.cell(&index).ok_or(Error::EmptyCell)?;
        let planes: Vec<Plane<N>> = members.iter().map(|&j| sample.planes()[j]).collect();
        let weights: Vec<f64> = members.iter().map(|&j| sample.weights()[j]).collect();
        out.push((index, tangent_fit_quality(&planes, &weights, &cell.plane)?));
    }
    Ok(out)
}
