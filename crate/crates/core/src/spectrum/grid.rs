use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use sprs::{CsMat, TriMat};

use crate::error::{invalid, Error, Result};
use crate::surfaces::ConformalPatch;

/// Smallest number of nodes per side accepted by [`Grid::build`].
pub const MIN_NODES_PER_SIDE: usize = 32;

/// Sentinel for a missing neighbour in index tables.
pub const NONE: u32 = u32::MAX;

/// Uniform node grid over a patch rectangle, with the conformal factor
/// sampled at every node of the patch region.
#[derive(Clone, Debug)]
pub struct Grid {
    pub u0: f64,
    pub v0: f64,
    pub spacing: f64,
    pub nu: usize,
    pub nv: usize,
    /// Whether the node lies in the patch region.
    pub in_region: Vec<bool>,
    /// Conformal factor (NaN outside the region).
    pub lambda: Vec<f64>,
    pub descriptor: String,
}

impl Grid {
    pub fn build(patch: &ConformalPatch, spacing: f64) -> Result<Grid> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(invalid(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let nu = ((patch.u_range[1] - patch.u_range[0]) / spacing + 1e-9).floor() as usize + 1;
        let nv = ((patch.v_range[1] - patch.v_range[0]) / spacing + 1e-9).floor() as usize + 1;
        if nu < MIN_NODES_PER_SIDE || nv < MIN_NODES_PER_SIDE {
            return Err(invalid(format!(
                "grid of {nu} x {nv} nodes does not resolve the domain (need {MIN_NODES_PER_SIDE} per side)"
            )));
        }
        let (u0, v0) = (patch.u_range[0], patch.v_range[0]);
        let samples: Vec<(bool, f64)> = (0..nu * nv)
            .into_par_iter()
            .map(|n| {
                let (u, v) = (
                    u0 + (n % nu) as f64 * spacing,
                    v0 + (n / nu) as f64 * spacing,
                );
                if patch.in_region(u, v) {
                    (true, patch.lambda(u, v))
                } else {
                    (false, f64::NAN)
                }
            })
            .collect();
        for (n, &(inside, l)) in samples.iter().enumerate() {
            if inside && !(l > 0.0 && l.is_finite()) {
                let (u, v) = (
                    u0 + (n % nu) as f64 * spacing,
                    v0 + (n / nu) as f64 * spacing,
                );
                return Err(invalid(format!(
                    "conformal factor {l} at ({u}, {v}) is not positive and finite"
                )));
            }
        }
        let (in_region, lambda) = samples.into_iter().unzip();
        Ok(Grid {
            u0,
            v0,
            spacing,
            nu,
            nv,
            in_region,
            lambda,
            descriptor: patch.descriptor.clone(),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    #[inline]
    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nu, node / self.nu)
    }

    #[inline]
    pub fn coords(&self, node: usize) -> (f64, f64) {
        let (i, j) = self.ij(node);
        (
            self.u0 + i as f64 * self.spacing,
            self.v0 + j as f64 * self.spacing,
        )
    }

    #[inline]
    pub fn on_edge(&self, node: usize) -> bool {
        let (i, j) = self.ij(node);
        i == 0 || j == 0 || i + 1 == self.nu || j + 1 == self.nv
    }

    /// The four axis neighbours `[west, east, south, north]` that exist on
    /// the grid.
    #[inline]
    pub fn neighbours4(&self, node: usize) -> [Option<usize>; 4] {
        let (i, j) = self.ij(node);
        [
            (i > 0).then(|| node - 1),
            (i + 1 < self.nu).then(|| node + 1),
            (j > 0).then(|| node - self.nu),
            (j + 1 < self.nv).then(|| node + self.nu),
        ]
    }

    /// Node closest to `(u, v)`, if it lies in the region.
    pub fn nearest_node(&self, u: f64, v: f64) -> Option<usize> {
        let i = ((u - self.u0) / self.spacing).round();
        let j = ((v - self.v0) / self.spacing).round();
        if i < 0.0 || j < 0.0 || i as usize >= self.nu || j as usize >= self.nv {
            return None;
        }
        let n = self.node(i as usize, j as usize);
        self.in_region[n].then_some(n)
    }

    /// Whether all four stencil neighbours of `node` exist and lie in the region.
    pub fn has_full_stencil(&self, node: usize) -> bool {
        self.in_region[node]
            && self
                .neighbours4(node)
                .iter()
                .all(|n| n.is_some_and(|m| self.in_region[m]))
    }

    /// Discrete Laplace-Beltrami `λ⁻² Δ_flat` of a node field at every node
    /// with a full stencil inside the region (NaN elsewhere).
    pub fn laplace_beltrami(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.len());
        let h2 = self.spacing * self.spacing;
        (0..self.len())
            .into_par_iter()
            .map(|n| {
                if !self.has_full_stencil(n) {
                    return f64::NAN;
                }
                let nb = self.neighbours4(n);
                let s: f64 = nb.iter().map(|m| values[m.unwrap()]).sum();
                (s - 4.0 * values[n]) / (h2 * self.lambda[n] * self.lambda[n])
            })
            .collect()
    }

    /// `Σ λ² Δ²` over the region nodes selected by `select`.
    pub fn area(&self, select: impl Fn(usize) -> bool) -> f64 {
        let h2 = self.spacing * self.spacing;
        (0..self.len())
            .filter(|&n| self.in_region[n] && select(n))
            .map(|n| self.lambda[n] * self.lambda[n] * h2)
            .sum()
    }
}

/// Role of a node in a discretised Dirichlet problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Interior,
    Boundary,
    Excluded,
}

/// Generalised eigenproblem `A v = μ M v` on the interior nodes.
///
/// `A` is the unscaled 5-point stencil (4 on the diagonal, −1 towards
/// interior neighbours, Dirichlet elimination of the rest) and `M` the
/// diagonal `λ² Δ²`, so the Rayleigh quotient is the discrete
/// `∫|∇v|² / ∫ λ² v²`.
#[derive(Clone, Debug)]
pub struct SpectralProblem {
    pub grid: Arc<Grid>,
    pub kind: Vec<NodeKind>,
    /// Interior index of each grid node, [`NONE`] for the others.
    pub index: Vec<u32>,
    /// Grid node of each interior index, in row-major order.
    pub interior: Vec<u32>,
    /// Interior indices of `[west, east, south, north]` neighbours.
    pub nbr: Vec<[u32; 4]>,
    pub mass: Vec<f64>,
}

/// Builds the grid and the Dirichlet problem with `excluded` removed.
pub fn discretize(
    patch: &ConformalPatch,
    spacing: f64,
    excluded: Option<&(dyn Fn(f64, f64) -> bool + Sync)>,
) -> Result<SpectralProblem> {
    let grid = Arc::new(Grid::build(patch, spacing)?);
    SpectralProblem::new(grid, excluded)
}

impl SpectralProblem {
    pub fn new(
        grid: Arc<Grid>,
        excluded: Option<&(dyn Fn(f64, f64) -> bool + Sync)>,
    ) -> Result<Self> {
        let mask: Vec<bool> = match excluded {
            Some(f) => (0..grid.len())
                .into_par_iter()
                .map(|n| {
                    let (u, v) = grid.coords(n);
                    grid.in_region[n] && f(u, v)
                })
                .collect(),
            None => vec![false; grid.len()],
        };
        Self::with_mask(grid, &mask)
    }

    /// Problem with an explicit node mask of excluded nodes.
    pub fn with_mask(grid: Arc<Grid>, excluded: &[bool]) -> Result<Self> {
        assert_eq!(excluded.len(), grid.len());
        let mut kind = Vec::with_capacity(grid.len());
        let mut index = vec![NONE; grid.len()];
        let mut interior = Vec::new();
        for n in 0..grid.len() {
            let k = if excluded[n] {
                NodeKind::Excluded
            } else if grid.in_region[n] && !grid.on_edge(n) {
                index[n] = interior.len() as u32;
                interior.push(n as u32);
                NodeKind::Interior
            } else {
                NodeKind::Boundary
            };
            kind.push(k);
        }
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }
        let h2 = grid.spacing * grid.spacing;
        let nbr = interior
            .iter()
            .map(|&n| {
                let nb = grid.neighbours4(n as usize);
                let mut out = [NONE; 4];
                for (o, m) in out.iter_mut().zip(nb) {
                    if let Some(m) = m {
                        *o = index[m];
                    }
                }
                out
            })
            .collect();
        let mass = interior
            .iter()
            .map(|&n| grid.lambda[n as usize].powi(2) * h2)
            .collect();
        Ok(SpectralProblem {
            grid,
            kind,
            index,
            interior,
            nbr,
            mass,
        })
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    /// `y = A x`.
    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(k, yk)| {
            let mut s = 4.0 * x[k];
            for &m in &self.nbr[k] {
                if m != NONE {
                    s -= x[m as usize];
                }
            }
            *yk = s;
        });
    }

    /// Stiffness matrix in CSR form.
    pub fn stiffness(&self) -> CsMat<f64> {
        let n = self.len();
        let mut t = TriMat::with_capacity((n, n), 5 * n);
        for k in 0..n {
            t.add_triplet(k, k, 4.0);
            for &m in &self.nbr[k] {
                if m != NONE {
                    t.add_triplet(k, m as usize, -1.0);
                }
            }
        }
        t.to_csr()
    }

    /// Rayleigh quotient `vᵀAv / vᵀMv` of an interior vector.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut av = vec![0.0; v.len()];
        self.apply_stiffness(v, &mut av);
        let num: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().zip(&self.mass).map(|(a, m)| a * a * m).sum();
        num / den
    }

    /// Spreads an interior vector onto grid nodes (zero elsewhere).
    pub fn to_grid(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (k, &n) in self.interior.iter().enumerate() {
            out[n as usize] = v[k];
        }
        out
    }

    /// Writes the stiffness as Matrix Market and the mass diagonal as CSV.
    pub fn export(&self, stiffness_path: &Path, mass_path: &Path) -> Result<()> {
        sprs::io::write_matrix_market(stiffness_path, &self.stiffness())?;
        let mut w = csv::Writer::from_path(mass_path)?;
        w.write_record(["index", "u", "v", "mass"])?;
        for (k, &n) in self.interior.iter().enumerate() {
            let (u, v) = self.grid.coords(n as usize);
            w.write_record([
                k.to_string(),
                u.to_string(),
                v.to_string(),
                self.mass[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
