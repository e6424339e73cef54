use std::sync::Arc;

use serde::Serialize;

use super::grid::{Grid, SpectralProblem};
use super::lobpcg::{smallest_eigs, EigOptions};
use crate::error::{Error, Result};
use crate::surfaces::ConformalPatch;

/// A region predicate on parameter points.
pub type RegionFn<'a> = &'a (dyn Fn(f64, f64) -> bool + Sync);

/// Bottom of the Dirichlet spectrum of a patch with a compact set removed.
#[derive(Clone, Debug, Serialize)]
pub struct ToneResult {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub unknowns: usize,
}

/// `λ*(M \ K)` on an existing grid.
pub fn fundamental_tone_on(
    grid: Arc<Grid>,
    excluded: Option<RegionFn>,
    opts: &EigOptions,
) -> Result<ToneResult> {
    let problem = SpectralProblem::new(grid, excluded)?;
    tone_of(&problem, opts)
}

pub(crate) fn tone_of(problem: &SpectralProblem, opts: &EigOptions) -> Result<ToneResult> {
    let mut o = opts.clone();
    o.k = o.k.max(1);
    let r = smallest_eigs(problem, &o)?;
    Ok(ToneResult {
        value: r.eigenvalues[0],
        residual: r.residuals[0],
        iterations: r.iterations,
        unknowns: problem.len(),
    })
}

/// `λ*(M \ K)` with Dirichlet conditions on `∂K` and on the outer boundary.
pub fn fundamental_tone(
    patch: &ConformalPatch,
    spacing: f64,
    excluded: Option<RegionFn>,
    opts: &EigOptions,
) -> Result<ToneResult> {
    let grid = Arc::new(Grid::build(patch, spacing)?);
    fundamental_tone_on(grid, excluded, opts)
}

/// Result of a Persson sweep over an exhaustion `K_1 ⊂ K_2 ⊂ …`.
#[derive(Clone, Debug, Serialize)]
pub struct PerssonReport {
    pub tones: Vec<ToneResult>,
    pub values: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub sup: f64,
    /// Whether the values are non-decreasing up to the relative slack used
    /// for solver noise.
    pub monotone: bool,
    pub spacing: f64,
    pub descriptor: String,
}

/// Relative slack allowed when checking Dirichlet monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-6;

/// Computes `λ*(M \ K_l)` for each set of the exhaustion.
pub fn persson_sweep(
    patch: &ConformalPatch,
    spacing: f64,
    exhaustion: &[RegionFn],
    opts: &EigOptions,
) -> Result<PerssonReport> {
    let grid = Arc::new(Grid::build(patch, spacing)?);
    persson_sweep_on(grid, exhaustion, opts)
}

pub fn persson_sweep_on(
    grid: Arc<Grid>,
    exhaustion: &[RegionFn],
    opts: &EigOptions,
) -> Result<PerssonReport> {
    let masks: Vec<Vec<bool>> = exhaustion
        .iter()
        .map(|k| {
            (0..grid.len())
                .map(|n| {
                    let (u, v) = grid.coords(n);
                    grid.in_region[n] && k(u, v)
                })
                .collect()
        })
        .collect();
    for (step, w) in masks.windows(2).enumerate() {
        if w[0].iter().zip(&w[1]).any(|(a, b)| *a && !*b) {
            return Err(Error::NotNested { step: step + 1 });
        }
    }
    let mut tones = Vec::with_capacity(masks.len());
    for mask in &masks {
        let problem = SpectralProblem::with_mask(grid.clone(), mask)?;
        tones.push(tone_of(&problem, opts)?);
    }
    let values: Vec<f64> = tones.iter().map(|t| t.value).collect();
    let mut running_sup = Vec::with_capacity(values.len());
    let mut s = f64::NEG_INFINITY;
    for &v in &values {
        s = s.max(v);
        running_sup.push(s);
    }
    let monotone = values
        .windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - MONOTONE_SLACK));
    Ok(PerssonReport {
        tones,
        values,
        running_sup,
        sup: s,
        monotone,
        spacing: grid.spacing,
        descriptor: grid.descriptor.clone(),
    })
}
