use serde::Serialize;

use super::grid::SpectralProblem;
use crate::error::{Error, Result};

/// Outcome of [`barta_bound`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BartaResult {
    /// `min (−Δ_g w)/w` over the selected interior nodes.
    pub value: f64,
    pub argmin_node: usize,
    pub nodes: usize,
}

/// Pointwise Barta quotient `(−λ⁻² Δ_flat w)/w` minimised over the interior
/// nodes of `problem` selected by `region` (all interior nodes when absent).
///
/// `w` is a grid-node field. It must be positive on the selected nodes and
/// non-negative on their stencil neighbours; a zero collar gives the
/// Dirichlet equality case.
pub fn barta_bound(
    problem: &SpectralProblem,
    w: &[f64],
    region: Option<&[bool]>,
) -> Result<BartaResult> {
    let grid = &problem.grid;
    assert_eq!(w.len(), grid.len());
    let h2 = grid.spacing * grid.spacing;
    let mut best = (f64::INFINITY, usize::MAX);
    let mut count = 0usize;
    for &n in &problem.interior {
        let n = n as usize;
        if region.is_some_and(|r| !r[n]) {
            continue;
        }
        if !(w[n] > 0.0) {
            return Err(Error::NonPositive(format!(
                "w = {} at node {n} {:?}",
                w[n],
                grid.coords(n)
            )));
        }
        let mut s = 4.0 * w[n];
        for m in grid.neighbours4(n).into_iter().flatten() {
            if !(w[m] >= 0.0) {
                return Err(Error::NonPositive(format!(
                    "w = {} on the collar node {m} {:?}",
                    w[m],
                    grid.coords(m)
                )));
            }
            s -= w[m];
        }
        let q = s / (h2 * grid.lambda[n] * grid.lambda[n] * w[n]);
        count += 1;
        if q < best.0 {
            best = (q, n);
        }
    }
    if count == 0 {
        return Err(Error::EmptyInterior);
    }
    Ok(BartaResult {
        value: best.0,
        argmin_node: best.1,
        nodes: count,
    })
}
