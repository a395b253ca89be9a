//! Revised simplex for the bounded Lipschitz distance between atomic measures.
//!
//! The primal problem is
//!
//! ```text
//! max  sum_i c_i phi_i
//! s.t. -a <= phi_i <= a,  phi_i - phi_j <= L d_ij,  a + L <= 1,  a, L >= 0
//! ```
//!
//! and we solve its dual, a minimum-cost flow with two side rows:
//!
//! ```text
//! min  lambda
//! s.t. p_i - q_i + sum_j f_ij - sum_j f_ji = c_i
//!      lambda - sum_i (p_i + q_i) - s_a = 0
//!      lambda - sum_ij d_ij f_ij - s_L = 0
//! ```
//!
//! with all variables nonnegative. The simplex multipliers of the optimal
//! basis are the optimal `(phi, a, L)`.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub(crate) struct LpSolution {
    pub value: f64,
    pub iterations: usize,
    pub phi: Vec<f64>,
    pub a: f64,
    pub lipschitz: f64,
}

const REFACTOR_EVERY: usize = 100;
const DEGENERATE_LIMIT: usize = 50;
const PIVOT_TOL: f64 = 1e-10;

struct Problem {
    k: usize,
    pairs: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
}

impl Problem {
    fn rows(&self) -> usize {
        self.k + 2
    }

    fn columns(&self) -> usize {
        2 * self.k + 3 + self.pairs.len()
    }

    fn cost(&self, j: usize) -> f64 {
        if j == 2 * self.k {
            1.0
        } else {
            0.0
        }
    }

    /// Nonzero entries of column `j` as `(row, value)`.
    fn column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        let (k, a, l) = (self.k, self.k, self.k + 1);
        out.clear();
        if j < k {
            out.extend([(j, 1.0), (a, -1.0)]);
        } else if j < 2 * k {
            out.extend([(j - k, -1.0), (a, -1.0)]);
        } else if j == 2 * k {
            out.extend([(a, 1.0), (l, 1.0)]);
        } else if j == 2 * k + 1 {
            out.push((a, -1.0));
        } else if j == 2 * k + 2 {
            out.push((l, -1.0));
        } else {
            let (p, q, d) = self.pairs[j - 2 * k - 3];
            out.extend([(p, 1.0), (q, -1.0), (l, -d)]);
        }
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let (k, a, l) = (self.k, self.k, self.k + 1);
        if j < k {
            -(y[j] - y[a])
        } else if j < 2 * k {
            -(-y[j - k] - y[a])
        } else if j == 2 * k {
            1.0 - y[a] - y[l]
        } else if j == 2 * k + 1 {
            y[a]
        } else if j == 2 * k + 2 {
            y[l]
        } else {
            let (p, q, d) = self.pairs[j - 2 * k - 3];
            -(y[p] - y[q] - d * y[l])
        }
    }
}

/// Solves the problem for weights `c` at points with pairwise distances
/// given by `dist`.
pub(crate) fn solve<F: Fn(usize, usize) -> f64>(c: &[f64], dist: F, max_iterations: usize) -> Result<LpSolution> {
    let k = c.len();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                pairs.push((i, j, dist(i, j)));
            }
        }
    }
    let mut rhs = c.to_vec();
    rhs.extend([0.0, 0.0]);
    let problem = Problem { k, pairs, rhs };
    Simplex::start(&problem).run(max_iterations)
}

struct Simplex<'p> {
    problem: &'p Problem,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
}

impl<'p> Simplex<'p> {
    fn start(problem: &'p Problem) -> Self {
        let k = problem.k;
        let m = problem.rows();
        // p_i or q_i by the sign of c_i, then lambda and s_L.
        let mut basis: Vec<usize> = (0..k)
            .map(|i| if problem.rhs[i] >= 0.0 { i } else { k + i })
            .collect();
        basis.push(2 * k);
        basis.push(2 * k + 2);
        let mut in_basis = vec![false; problem.columns()];
        for &j in &basis {
            in_basis[j] = true;
        }
        let mut s = Self {
            problem,
            basis,
            in_basis,
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
        };
        s.refactor().expect("initial basis is nonsingular");
        s
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.problem.rows();
        let mut b = DMatrix::<f64>::zeros(m, m);
        let mut col = Vec::with_capacity(3);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.problem.column(j, &mut col);
            for &(r, v) in &col {
                b[(r, pos)] = v;
            }
        }
        let inv = b
            .try_inverse()
            .ok_or_else(|| Error::Lp("basis became singular".into()))?;
        for i in 0..m {
            for j in 0..m {
                self.binv[i * m + j] = inv[(i, j)];
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.problem.rhs).map(|(a, b)| a * b).sum();
            self.xb[i] = v.max(0.0);
        }
        Ok(())
    }

    fn multipliers(&self) -> Vec<f64> {
        let m = self.problem.rows();
        let mut y = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            let cb = self.problem.cost(j);
            if cb != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += cb * b;
                }
            }
        }
        y
    }

    fn run(mut self, max_iterations: usize) -> Result<LpSolution> {
        let m = self.problem.rows();
        let ncols = self.problem.columns();
        let scale = self.problem.rhs.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        let cost_tol = 1e-12;
        let mut col = Vec::with_capacity(3);
        let mut u = vec![0.0; m];
        let mut degenerate_run = 0usize;
        let mut iterations = 0usize;
        loop {
            let y = self.multipliers();
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let mut entering = None;
            let mut best = -cost_tol;
            for j in 0..ncols {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.problem.reduced_cost(j, &y);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                let value = self
                    .basis
                    .iter()
                    .zip(&self.xb)
                    .map(|(&j, x)| self.problem.cost(j) * x)
                    .sum();
                let k = self.problem.k;
                return Ok(LpSolution {
                    value,
                    iterations,
                    phi: y[..k].to_vec(),
                    a: y[k],
                    lipschitz: y[k + 1],
                });
            };
            if iterations >= max_iterations {
                return Err(Error::Lp(format!("no convergence after {iterations} iterations")));
            }
            iterations += 1;

            self.problem.column(q, &mut col);
            for (i, ui) in u.iter_mut().enumerate() {
                let row = &self.binv[i * m..(i + 1) * m];
                *ui = col.iter().map(|&(r, v)| row[r] * v).sum();
            }
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..m {
                if u[i] > PIVOT_TOL {
                    let t = self.xb[i] / u[i];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if t < ratio - 1e-14 * scale {
                                true
                            } else if t <= ratio + 1e-14 * scale {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    u[i] > u[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(i);
                        ratio = ratio.min(t);
                    }
                }
            }
            let Some(r) = leave else {
                return Err(Error::Lp("unbounded direction".into()));
            };
            let theta = self.xb[r] / u[r];
            if theta <= 1e-15 * scale {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for (i, (x, ui)) in self.xb.iter_mut().zip(&u).enumerate() {
                if i != r {
                    *x = (*x - theta * ui).max(0.0);
                }
            }
            self.xb[r] = theta;
            let pivot = u[r];
            let (before, rest) = self.binv.split_at_mut(r * m);
            let (prow, after) = rest.split_at_mut(m);
            for v in prow.iter_mut() {
                *v /= pivot;
            }
            for (i, row) in before.chunks_mut(m).enumerate() {
                let f = u[i];
                if f != 0.0 {
                    for (a, b) in row.iter_mut().zip(prow.iter()) {
                        *a -= f * b;
                    }
                }
            }
            for (i, row) in after.chunks_mut(m).enumerate() {
                let f = u[r + 1 + i];
                if f != 0.0 {
                    for (a, b) in row.iter_mut().zip(prow.iter()) {
                        *a -= f * b;
                    }
                }
            }
            self.in_basis[self.basis[r]] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            if iterations.is_multiple_of(REFACTOR_EVERY) {
                self.refactor()?;
            }
        }
    }
}
