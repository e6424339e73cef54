use serde::Serialize;

use super::geodesic::{geodesic_distance, touches_boundary};
use super::grid::Grid;
use crate::error::{invalid, Error, Result};

/// Per-ball data of [`ball_property_check`].
#[derive(Clone, Debug, Serialize)]
pub struct BallData {
    pub center: (f64, f64),
    pub center_node: usize,
    pub volume_r: f64,
    pub volume_delta_r: f64,
    /// `vol(B_{δR}) / vol(B_R)`.
    pub ratio: f64,
    /// `∫ |∇φ|²` of the radial cutoff.
    pub energy: f64,
    /// `∫ φ²`.
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallPropertyReport {
    pub r: f64,
    pub delta: f64,
    pub balls: Vec<BallData>,
    /// `max vol(B_R)/vol(B_{δR})`.
    pub c: f64,
    /// `C / (R² (1 − δ)²)`.
    pub bound: f64,
    /// Largest `∫|∇φ_j|² / ∫φ_j²`; every `I_λ(φ_j, φ_j)` is negative for
    /// `λ` above it.
    pub rayleigh_threshold: f64,
}

impl BallPropertyReport {
    /// `I_λ(φ_j, φ_j) = ∫|∇φ_j|² − λ ∫φ_j²` for each ball.
    pub fn i_lambda(&self, lambda: f64) -> Vec<f64> {
        self.balls
            .iter()
            .map(|b| b.energy - lambda * b.mass)
            .collect()
    }
}

/// Cutoff `ψ(t) = 1` for `t ≤ δR`, linear down to `0` at `t = R`.
pub fn cutoff(t: f64, r: f64, delta: f64) -> f64 {
    if t <= delta * r {
        1.0
    } else if t >= r {
        0.0
    } else {
        (r - t) / ((1.0 - delta) * r)
    }
}

/// Checks the two-radius volume comparison on disjoint intrinsic balls and
/// evaluates the cutoff quadratic forms.
pub fn ball_property_check(
    grid: &Grid,
    centers: &[(f64, f64)],
    r: f64,
    delta: f64,
) -> Result<BallPropertyReport> {
    if centers.is_empty() {
        return Err(invalid("no ball centres"));
    }
    if !(r > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!(
            "need R > 0 and δ in (0, 1), got R={r}, δ={delta}"
        )));
    }
    let h2 = grid.spacing * grid.spacing;
    let mut owner = vec![u32::MAX; grid.len()];
    let mut balls = Vec::with_capacity(centers.len());
    for (idx, &(u, v)) in centers.iter().enumerate() {
        let c = grid
            .nearest_node(u, v)
            .ok_or_else(|| invalid(format!("centre ({u}, {v}) is not a region node")))?;
        let dist = geodesic_distance(grid, &[c], r);
        let mut vol_r = 0.0;
        let mut vol_d = 0.0;
        let mut energy = 0.0;
        let mut mass = 0.0;
        for n in 0..grid.len() {
            let d = dist[n];
            if !d.is_finite() {
                continue;
            }
            if touches_boundary(grid, n) {
                return Err(Error::BallLeavesDomain { index: idx });
            }
            if owner[n] != u32::MAX {
                return Err(Error::OverlappingBalls {
                    first: owner[n] as usize,
                    second: idx,
                });
            }
            owner[n] = idx as u32;
            let a = grid.lambda[n] * grid.lambda[n] * h2;
            vol_r += a;
            if d <= delta * r {
                vol_d += a;
            }
            let phi = cutoff(d, r, delta);
            mass += a * phi * phi;
            for m in grid.neighbours4(n).into_iter().flatten() {
                let dm = dist[m];
                if dm.is_finite() {
                    if m > n {
                        energy += (phi - cutoff(dm, r, delta)).powi(2);
                    }
                } else {
                    energy += phi * phi;
                }
            }
        }
        if vol_d <= 0.0 {
            return Err(invalid(format!(
                "ball {idx}: radius δR does not contain a node"
            )));
        }
        balls.push(BallData {
            center: grid.coords(c),
            center_node: c,
            volume_r: vol_r,
            volume_delta_r: vol_d,
            ratio: vol_d / vol_r,
            energy,
            mass,
        });
    }
    let c = balls.iter().map(|b| 1.0 / b.ratio).fold(0.0, f64::max);
    let rayleigh_threshold = balls.iter().map(|b| b.energy / b.mass).fold(0.0, f64::max);
    Ok(BallPropertyReport {
        r,
        delta,
        c,
        bound: c / (r * r * (1.0 - delta) * (1.0 - delta)),
        balls,
        rayleigh_threshold,
    })
}
