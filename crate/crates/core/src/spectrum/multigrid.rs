//! Geometric multigrid V-cycle for the five-point stencil on a masked grid.
//!
//! Coarse unknowns are the fine unknowns at even grid positions, transfer
//! is bilinear interpolation and its transpose, and coarse operators are
//! Galerkin products, so irregular Dirichlet boundaries need no special
//! treatment.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use sprs::{CsMat, TriMat};

use super::grid::SpectralProblem;

/// Levels are coarsened until at most this many unknowns remain.
const COARSE_TARGET: usize = 400;
/// Largest coarsest level factorised densely.
const DENSE_COARSE: usize = 2500;
/// Symmetric Gauss-Seidel sweeps on a coarsest level too large to factorise.
const COARSE_SWEEPS: usize = 20;

struct Csr {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl Csr {
    fn from_sprs(m: &CsMat<f64>) -> Self {
        let m = if m.is_csr() { m.clone() } else { m.to_csr() };
        Csr {
            indptr: m.proper_indptr().into_owned(),
            indices: m.indices().to_vec(),
            data: m.data().to_vec(),
        }
    }

    fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .cloned()
            .zip(self.data[r].iter().cloned())
    }

    /// `y = self · x`.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|i| self.row(i).map(|(j, a)| a * x[j]).sum())
            .collect()
    }
}

struct Level {
    a: Csr,
    diag: Vec<f64>,
    /// Interpolation from the next coarser level.
    p: Option<Csr>,
    /// Its transpose.
    r: Option<Csr>,
}

enum CoarseSolver {
    Dense(Cholesky<f64, Dyn>),
    Sweeps,
}

pub(crate) struct Multigrid {
    levels: Vec<Level>,
    coarse: CoarseSolver,
}

impl Multigrid {
    pub(crate) fn new(problem: &SpectralProblem) -> Self {
        let grid = &problem.grid;
        let mut pos: Vec<(usize, usize)> = problem
            .interior
            .iter()
            .map(|&n| grid.ij(n as usize))
            .collect();
        let mut a = problem.stiffness();
        let mut levels = Vec::new();
        loop {
            let n = pos.len();
            let coarse: Vec<(usize, usize)> = if n <= COARSE_TARGET {
                Vec::new()
            } else {
                pos.iter()
                    .cloned()
                    .filter(|&(i, j)| i % 2 == 0 && j % 2 == 0)
                    .collect()
            };
            let diag = (0..n).map(|i| *a.get(i, i).unwrap_or(&1.0)).collect();
            if coarse.is_empty() || coarse.len() == n {
                levels.push(Level {
                    a: Csr::from_sprs(&a),
                    diag,
                    p: None,
                    r: None,
                });
                break;
            }
            let lookup: HashMap<(usize, usize), usize> =
                coarse.iter().enumerate().map(|(k, &q)| (q, k)).collect();
            let mut t = TriMat::with_capacity((n, coarse.len()), 4 * n);
            for (row, &(i, j)) in pos.iter().enumerate() {
                let is: &[usize] = if i % 2 == 0 { &[i] } else { &[i - 1, i + 1] };
                let js: &[usize] = if j % 2 == 0 { &[j] } else { &[j - 1, j + 1] };
                let w = 1.0 / (is.len() * js.len()) as f64;
                for &ci in is {
                    for &cj in js {
                        if let Some(&col) = lookup.get(&(ci, cj)) {
                            t.add_triplet(row, col, w);
                        }
                    }
                }
            }
            let p: CsMat<f64> = t.to_csr();
            let r: CsMat<f64> = p.transpose_view().to_csr();
            let ac: CsMat<f64> = &(&r * &a) * &p;
            levels.push(Level {
                a: Csr::from_sprs(&a),
                diag,
                p: Some(Csr::from_sprs(&p)),
                r: Some(Csr::from_sprs(&r)),
            });
            a = ac;
            pos = coarse.iter().map(|&(i, j)| (i / 2, j / 2)).collect();
        }
        let last = levels.last().unwrap();
        let n = last.a.rows();
        let coarse = if n <= DENSE_COARSE {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for (j, v) in last.a.row(i) {
                    m[(i, j)] = v;
                }
            }
            Cholesky::new(m).map_or(CoarseSolver::Sweeps, CoarseSolver::Dense)
        } else {
            CoarseSolver::Sweeps
        };
        Multigrid { levels, coarse }
    }

    #[cfg(test)]
    pub(crate) fn depth(&self) -> usize {
        self.levels.len()
    }

    /// One symmetric V(1,1) cycle for `A x = b` from a zero guess.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.cycle(0, b)
    }

    fn cycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        let level = &self.levels[l];
        let mut x = vec![0.0; b.len()];
        let (Some(p), Some(r)) = (&level.p, &level.r) else {
            match &self.coarse {
                CoarseSolver::Dense(ch) => {
                    let s = ch.solve(&DVector::from_column_slice(b));
                    x.copy_from_slice(s.as_slice());
                }
                CoarseSolver::Sweeps => {
                    for _ in 0..COARSE_SWEEPS {
                        sweep(level, b, &mut x, true);
                        sweep(level, b, &mut x, false);
                    }
                }
            }
            return x;
        };
        sweep(level, b, &mut x, true);
        let ax = level.a.apply(&x);
        let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let ec = self.cycle(l + 1, &r.apply(&res));
        for (xi, e) in x.iter_mut().zip(p.apply(&ec)) {
            *xi += e;
        }
        sweep(level, b, &mut x, false);
        x
    }
}

/// One Gauss-Seidel sweep, forward or backward.
fn sweep(level: &Level, b: &[f64], x: &mut [f64], forward: bool) {
    let n = b.len();
    let mut step = |i: usize| {
        let mut acc = b[i];
        for (j, a) in level.a.row(i) {
            if j != i {
                acc -= a * x[j];
            }
        }
        x[i] = acc / level.diag[i];
    };
    if forward {
        (0..n).for_each(&mut step);
    } else {
        (0..n).rev().for_each(&mut step);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::discretize;
    use crate::surfaces::flat_disk;

    #[test]
    fn v_cycle_contracts() {
        let p = discretize(&flat_disk(1.0).unwrap(), 1.0 / 64.0, None).unwrap();
        let mg = Multigrid::new(&p);
        assert!(mg.depth() >= 3);
        let a = Csr::from_sprs(&p.stiffness());
        let b = vec![1.0; p.len()];
        let mut x = vec![0.0; p.len()];
        let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
        let mut last = norm(&b);
        // the first cycle also removes the boundary layer of the constant
        // right-hand side; later cycles show the asymptotic rate
        for cycle in 0..8 {
            let ax = a.apply(&x);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let e = mg.solve(&res);
            x.iter_mut().zip(e).for_each(|(xi, ei)| *xi += ei);
            let ax = a.apply(&x);
            let now = norm(
                &b.iter()
                    .zip(&ax)
                    .map(|(bi, ai)| bi - ai)
                    .collect::<Vec<_>>(),
            );
            let bound = if cycle == 0 { 0.5 } else { 0.25 };
            assert!(now < bound * last, "cycle {cycle}: {now} vs {last}");
            last = now;
        }
    }
}
