//! Surrogate patches for the labyrinth construction: the conformal factor
//! `λ = (|eʰ| + |e⁻ʰ|)/2` on one annulus, with an explicit `h` satisfying
//! `|h − c_n| < 1`.

use num_complex::Complex64;
use serde::Serialize;

use super::ConformalPatch;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LabyrinthParams {
    pub n: u32,
    /// Radial width of the annulus `1 < |z| < 1 + r_n`.
    pub r_n: f64,
    pub c_n: f64,
    /// Slope of the surrogate `h(z) = c_n + ε z`.
    pub eps: [f64; 2],
}

impl LabyrinthParams {
    /// `r_n = c_n = 1/n`.
    pub fn harmonic(n: u32, eps: [f64; 2]) -> Self {
        let r = 1.0 / n.max(1) as f64;
        LabyrinthParams {
            n,
            r_n: r,
            c_n: r,
            eps,
        }
    }

    /// `C_n = (e^{c_n − 1} + e^{−c_n − 1})/2`.
    pub fn big_c(&self) -> f64 {
        0.5 * ((self.c_n - 1.0).exp() + (-self.c_n - 1.0).exp())
    }

    pub fn surrogate_h(&self, u: f64, v: f64) -> Complex64 {
        Complex64::new(self.c_n, 0.0)
            + Complex64::new(self.eps[0], self.eps[1]) * Complex64::new(u, v)
    }

    pub fn lambda(&self, u: f64, v: f64) -> f64 {
        let h = self.surrogate_h(u, v);
        0.5 * (h.exp().norm() + (-h).exp().norm())
    }

    /// Half-width in `v` of the parameter window.
    pub fn window(&self) -> f64 {
        2.0 * self.r_n
    }

    /// Lower bound `r_n e^{c_n − 1}/2` for the length of a crossing.
    pub fn crossing_bound(&self) -> f64 {
        0.5 * self.r_n * (self.c_n - 1.0).exp()
    }
}

/// Window `{1 < |z| < 1 + r_n, u > 0, |v| ≤ 2 r_n}` of the `n`-th annulus.
pub fn labyrinth_patch(params: LabyrinthParams) -> Result<ConformalPatch> {
    if !(params.r_n > 0.0) || !params.c_n.is_finite() {
        return Err(invalid("labyrinth annulus width must be positive"));
    }
    let outer = 1.0 + params.r_n;
    let w = params.window();
    // |h − c_n| = |ε||z| is largest at the outermost point of the window.
    let sup = params.eps[0].hypot(params.eps[1]) * outer;
    if !(sup < 1.0) {
        return Err(Error::Constraint(format!(
            "|h - c_n| reaches {sup} on the annulus, must stay below 1"
        )));
    }
    let p = params;
    let patch = ConformalPatch::new(
        [0.0, outer],
        [-w, w],
        move |u, v| p.lambda(u, v),
        format!("labyrinth annulus n={} r_n={} c_n={}", p.n, p.r_n, p.c_n),
    )?
    .with_region(move |u, v| {
        let r2 = u * u + v * v;
        u > 0.0 && r2 > 1.0 && r2 < outer * outer
    })
    .with_boundary_distance(move |u, v| {
        let r = u.hypot(v);
        (r - 1.0).min(outer - r)
    });
    Ok(patch)
}

/// Partial sums of `Σ r_n e^{c_n − 1}` over even `n ≤ N` for `r_n = c_n = 1/n`,
/// reported at each `N` in `checkpoints`.
pub fn labyrinth_divergence_sums(checkpoints: &[u64]) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let mut acc = 0.0;
    let mut n = 2u64;
    for &cp in &sorted {
        while n <= cp {
            let r = 1.0 / n as f64;
            acc += r * (r - 1.0).exp();
            n += 2;
        }
        out.push((cp, acc));
    }
    out
}
