//! Point-cloud, sampled-manifold and volumetric varifolds.
//!
//! Every representation exposes its measure through a list of weighted atoms
//! `(x, P, m)`; mass, varifold integrals and the first variation are sums over
//! those atoms.

use std::borrow::Cow;
use std::io::{Read, Write};

use crate::discretization::{CellIndex, Mesh};
use crate::geometry::{Plane, WeightedSample};
use crate::quadrature::CompensatedSum;
use crate::table::{number, Table};
use crate::{Error, Matrix, Point, Result};

/// A point mass carrying a tangent plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<const N: usize> {
    pub position: Point<N>,
    pub plane: Plane<N>,
    pub mass: f64,
}

/// A `C^1` vector field with an analytic Jacobian.
pub trait VectorField<const N: usize>: Sync {
    fn value(&self, x: &Point<N>) -> Point<N>;

    /// `jacobian(x)[(i, j)] = d X_i / d x_j`.
    fn jacobian(&self, x: &Point<N>) -> Matrix<N>;
}

/// A varifold whose measure is available as weighted atoms.
pub trait Varifold<const N: usize>: Sync {
    /// Dimension `d` of the tangent planes.
    fn dim(&self) -> usize;

    /// Quadrature atoms used for mass and varifold integrals.
    fn atoms(&self) -> Cow<'_, [Atom<N>]>;

    /// Quadrature atoms used for kernel convolutions at scale `eps`.
    fn kernel_atoms(&self, _eps: f64) -> Cow<'_, [Atom<N>]> {
        self.atoms()
    }

    /// Total mass `||V||(R^N)`.
    fn mass_total(&self) -> f64 {
        self.atoms().iter().map(|a| a.mass).collect::<CompensatedSum>().value()
    }

    /// `||V||(phi)`.
    fn mass_apply<F: Fn(&Point<N>) -> f64>(&self, phi: F) -> f64 {
        self.atoms()
            .iter()
            .map(|a| a.mass * phi(&a.position))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `V(phi)` for `phi` defined on positions and planes.
    fn varifold_apply<F: Fn(&Point<N>, &Plane<N>) -> f64>(&self, phi: F) -> f64 {
        self.atoms()
            .iter()
            .map(|a| a.mass * phi(&a.position, &a.plane))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `deltaV(X) = int div_S X dV(x, S)` with `div_S X = trace(P DX)`.
    fn first_variation<X: VectorField<N> + ?Sized>(&self, field: &X) -> f64 {
        self.atoms()
            .iter()
            .map(|a| a.mass * (a.plane.projector() * field.jacobian(&a.position)).trace())
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Finitely many weighted atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloudVarifold<const N: usize> {
    dim: usize,
    atoms: Vec<Atom<N>>,
}

impl<const N: usize> PointCloudVarifold<N> {
    /// Builds the varifold, dropping zero-mass atoms.
    pub fn new(dim: usize, atoms: Vec<Atom<N>>) -> Result<Self> {
        let mut kept = Vec::with_capacity(atoms.len());
        for a in atoms {
            if a.plane.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.plane.dim(),
                });
            }
            if a.mass < 0.0 || !a.mass.is_finite() {
                return Err(Error::InvalidArgument(format!("atom mass {}", a.mass)));
            }
            if a.mass > 0.0 {
                kept.push(a);
            }
        }
        Ok(Self { dim, atoms: kept })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Table with columns `x1..xN, mass`, then the `d` tangent basis vectors.
    pub fn to_table(&self) -> Table {
        let mut header: Vec<String> = (1..=N).map(|i| format!("x{i}")).collect();
        header.push("mass".into());
        for k in 1..=self.dim {
            header.extend((1..=N).map(|i| format!("t{k}_{i}")));
        }
        let mut table = Table::new(header);
        for a in &self.atoms {
            let mut row: Vec<f64> = a.position.iter().copied().collect();
            row.push(a.mass);
            for e in a.plane.basis() {
                row.extend(e.iter().copied());
            }
            table.push_numbers(&row);
        }
        table
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.to_table().write_to(writer)
    }

    /// Reads the format written by [`PointCloudVarifold::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let table = Table::read_from(reader)?;
        let cols = table.header().len();
        if cols < N + 1 || !(cols - N - 1).is_multiple_of(N) {
            return Err(Error::Parse(format!("{cols} columns do not fit R^{N}")));
        }
        let dim = (cols - N - 1) / N;
        let mut atoms = Vec::with_capacity(table.rows().len());
        for (line, row) in table.rows().iter().enumerate() {
            let values = row
                .iter()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            let position = Point::<N>::from_column_slice(&values[..N]);
            let basis: Vec<Point<N>> = values[N + 1..]
                .chunks(N)
                .map(Point::<N>::from_column_slice)
                .collect();
            atoms.push(Atom {
                position,
                plane: Plane::from_basis(&basis)?,
                mass: values[N],
            });
        }
        Self::new(dim, atoms)
    }
}

impl<const N: usize> Varifold<N> for PointCloudVarifold<N> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn atoms(&self) -> Cow<'_, [Atom<N>]> {
        Cow::Borrowed(&self.atoms)
    }
}

/// The varifold of a smooth submanifold, realized by a quadrature sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledManifoldVarifold<const N: usize> {
    sample: WeightedSample<N>,
    atoms: Vec<Atom<N>>,
}

impl<const N: usize> SampledManifoldVarifold<N> {
    pub fn new(sample: WeightedSample<N>) -> Self {
        let atoms = sample
            .iter()
            .map(|(x, p, w)| Atom {
                position: *x,
                plane: *p,
                mass: w,
            })
            .collect();
        Self { sample, atoms }
    }

    pub fn sample(&self) -> &WeightedSample<N> {
        &self.sample
    }
}

impl<const N: usize> Varifold<N> for SampledManifoldVarifold<N> {
    fn dim(&self) -> usize {
        self.sample.dim()
    }
    fn atoms(&self) -> Cow<'_, [Atom<N>]> {
        Cow::Borrowed(&self.atoms)
    }
    fn mass_total(&self) -> f64 {
        self.sample.total_weight()
    }
}

/// Mass and plane of one mesh cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell<const N: usize> {
    pub mass: f64,
    pub plane: Plane<N>,
}

/// Largest number of per-axis subdivisions used for cell quadrature.
pub const MAX_SUBDIVISIONS: usize = 64;

/// Piecewise-constant varifold: each cell `K` carries the measure
/// `m_K / |K| L^N|_K x delta_{P_K}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumetricVarifold<const N: usize> {
    mesh: Mesh<N>,
    dim: usize,
    cells: Vec<(CellIndex<N>, Cell<N>)>,
    subdivisions: usize,
}

impl<const N: usize> VolumetricVarifold<N> {
    /// Builds the varifold from cells sorted by index; zero-mass cells are
    /// dropped. Uses the default of 2 quadrature subdivisions per axis.
    pub fn new(mesh: Mesh<N>, dim: usize, cells: Vec<(CellIndex<N>, Cell<N>)>) -> Result<Self> {
        let mut kept = Vec::with_capacity(cells.len());
        for (index, cell) in cells {
            if cell.plane.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: cell.plane.dim(),
                });
            }
            if !mesh.has_cell(&index) {
                return Err(Error::InvalidArgument(format!("cell {index:?} outside the mesh")));
            }
            if cell.mass < 0.0 || !cell.mass.is_finite() {
                return Err(Error::InvalidArgument(format!("cell mass {}", cell.mass)));
            }
            if cell.mass > 0.0 {
                kept.push((index, cell));
            }
        }
        kept.sort_by_key(|a| a.0);
        if kept.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate cell index".into()));
        }
        Ok(Self {
            mesh,
            dim,
            cells: kept,
            subdivisions: 2,
        })
    }

    /// Sets the number of midpoint-rule subdivisions per axis used by
    /// [`Varifold::atoms`].
    pub fn with_subdivisions(mut self, s: usize) -> Self {
        self.subdivisions = s.clamp(1, MAX_SUBDIVISIONS);
        self
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn mesh(&self) -> &Mesh<N> {
        &self.mesh
    }

    /// Diameter bound of the cells.
    pub fn h(&self) -> f64 {
        self.mesh.diameter()
    }

    pub fn cells(&self) -> &[(CellIndex<N>, Cell<N>)] {
        &self.cells
    }

    pub fn cell(&self, index: &CellIndex<N>) -> Option<&Cell<N>> {
        self.cells
            .binary_search_by(|(k, _)| k.cmp(index))
            .ok()
            .map(|i| &self.cells[i].1)
    }

    /// Subdivisions per axis for kernel quadrature at scale `eps`:
    /// `max(s, ceil(4h/eps))`.
    pub fn kernel_subdivisions(&self, eps: f64) -> usize {
        let refine = (4.0 * self.h() / eps).ceil();
        let refine = if refine.is_finite() { refine as usize } else { MAX_SUBDIVISIONS };
        self.subdivisions.max(refine).clamp(1, MAX_SUBDIVISIONS)
    }

    /// Atoms of the midpoint rule with `s` subdivisions per axis.
    pub fn atoms_with(&self, s: usize) -> Vec<Atom<N>> {
        let per_cell = s.pow(N as u32);
        let mut atoms = Vec::with_capacity(self.cells.len() * per_cell);
        for (index, cell) in &self.cells {
            let m = cell.mass / per_cell as f64;
            for position in self.mesh.subpoints(index, s) {
                atoms.push(Atom {
                    position,
                    plane: cell.plane,
                    mass: m,
                });
            }
        }
        atoms
    }

    /// Atoms at cell centers carrying the full cell masses.
    pub fn center_atoms(&self) -> Vec<Atom<N>> {
        self.cells
            .iter()
            .map(|(index, cell)| Atom {
                position: self.mesh.cell_center(index),
                plane: cell.plane,
                mass: cell.mass,
            })
            .collect()
    }

    /// Table with cell index, center, mass and projector entries (row-major).
    pub fn to_table(&self) -> Table {
        let mut header: Vec<String> = (1..=N).map(|i| format!("i{i}")).collect();
        header.extend((1..=N).map(|i| format!("c{i}")));
        header.push("mass".into());
        for r in 1..=N {
            header.extend((1..=N).map(|c| format!("p{r}{c}")));
        }
        let mut table = Table::new(header);
        for (index, cell) in &self.cells {
            let mut row: Vec<String> = index.iter().map(|i| i.to_string()).collect();
            row.extend(self.mesh.cell_center(index).iter().map(|v| number(*v)));
            row.push(number(cell.mass));
            let p = cell.plane.projector();
            for r in 0..N {
                for c in 0..N {
                    row.push(number(p[(r, c)]));
                }
            }
            table.push(row);
        }
        table
    }
}

impl<const N: usize> Varifold<N> for VolumetricVarifold<N> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn atoms(&self) -> Cow<'_, [Atom<N>]> {
        Cow::Owned(self.atoms_with(self.subdivisions))
    }
    fn kernel_atoms(&self, eps: f64) -> Cow<'_, [Atom<N>]> {
        Cow::Owned(self.atoms_with(self.kernel_subdivisions(eps)))
    }
    fn mass_total(&self) -> f64 {
        self.cells
            .iter()
            .map(|(_, c)| c.mass)
            .collect::<CompensatedSum>()
            .value()
    }
}
