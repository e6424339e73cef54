use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::barta::barta_bound;
use super::grid::{Grid, SpectralProblem};
use crate::comparison::{ConvexityData, RadialModel};
use crate::error::{invalid, Error, Result};
use crate::hausdorff::Gauge;
use crate::subharmonic::{build_barrier, default_gauge_s, BarrierProfile};
use crate::surfaces::ConformalPatch;
use crate::{dist3, Point3};

/// A convex domain `D` given by a convex defining function `F` (`F < 0`
/// inside, `F = 0` on `∂D`) and the distance to `∂D`.
#[derive(Clone)]
pub struct ConvexDomain {
    f: Arc<dyn Fn(&Point3) -> f64 + Send + Sync>,
    boundary_distance: Arc<dyn Fn(&Point3) -> f64 + Send + Sync>,
    /// Convexity constant of `F`.
    pub c: f64,
    pub diameter: f64,
    pub descriptor: String,
}

impl ConvexDomain {
    /// Geodesic ball `B_R(center)` of a radial model with `F = f(ρ) − f(R)`.
    pub fn from_convexity(data: &ConvexityData, model: &RadialModel, center: Point3) -> Self {
        let r = data.radius;
        let fr = *data.f.last().unwrap();
        let d = data.clone();
        let m = model.clone();
        ConvexDomain {
            f: Arc::new(move |x| {
                d.f_at(&m, dist3(x, &center).min(r)) - fr
                    + (dist3(x, &center) - r).max(0.0) * m.h_at(r)
            }),
            boundary_distance: Arc::new(move |x| (r - dist3(x, &center)).max(0.0)),
            c: data.c,
            diameter: 2.0 * r,
            descriptor: format!("ball of radius {r} about {center:?}"),
        }
    }

    pub fn f(&self, x: &Point3) -> f64 {
        (self.f)(x)
    }

    pub fn boundary_distance(&self, x: &Point3) -> f64 {
        (self.boundary_distance)(x)
    }
}

/// A cover ball `B_ε(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverBall {
    pub center: Point3,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub r1: f64,
    pub b1: f64,
    pub k1: usize,
    /// `Σ Ψ(ε_j)`.
    pub cover_sum: f64,
    /// `‖u_j‖_∞ = g_j(R)` per ball.
    pub sup_norms: Vec<f64>,
    pub min_w1: f64,
    /// `inf (−Δw₁)/w₁` over `M \ K_{r1}`.
    pub measured_bound: f64,
    pub argmin: (f64, f64),
    pub nodes: usize,
    /// `1/√r1`, the predicted order.
    pub predicted_order: f64,
    /// Barta quotient of the constant function on the same nodes.
    pub baseline: f64,
}

/// Barrier inputs shared by every cover ball.
#[derive(Clone, Debug)]
pub struct WitnessBarriers<'a> {
    pub model: &'a RadialModel,
    pub theta: f64,
    /// Radius `R` of the barrier profiles; must exceed every ambient
    /// distance on the patch.
    pub r: f64,
}

/// Builds `w₁ = Σ (2‖u_j‖ − u_j) − u_∞` on the patch grid and evaluates its
/// Barta quotient on `M \ K_{r1}`.
pub fn barta_witness(
    patch: &ConformalPatch,
    spacing: f64,
    domain: &ConvexDomain,
    cover: &[CoverBall],
    r1: f64,
    barriers: &WitnessBarriers,
) -> Result<WitnessReport> {
    if !patch.has_immersion() {
        return Err(invalid("witness construction needs an immersion"));
    }
    if !(r1 > 0.0) {
        return Err(invalid("r1 must be positive"));
    }
    if cover.len() < 2 {
        return Err(Error::NonPositive(format!(
            "cover has {} ball(s); at least two are needed for a positive witness",
            cover.len()
        )));
    }
    let gauge = Gauge::for_theta(barriers.theta)?;
    let mut cover_sum = 0.0;
    for b in cover {
        if !(b.radius > 0.0 && b.radius <= r1) {
            return Err(invalid(format!(
                "cover radius {} must lie in (0, r1 = {r1}]",
                b.radius
            )));
        }
        cover_sum += gauge.eval(b.radius)?;
    }
    if cover_sum > r1 {
        return Err(invalid(format!("cover sum {cover_sum} exceeds r1 = {r1}")));
    }
    let s = default_gauge_s(barriers.theta)?;
    let mut profiles: Vec<(f64, BarrierProfile)> = Vec::new();
    for b in cover {
        if !profiles.iter().any(|(a, _)| *a == b.radius) {
            profiles.push((
                b.radius,
                build_barrier(barriers.model, barriers.theta, b.radius, &s, barriers.r)?,
            ));
        }
    }
    let profile_of = |a: f64| &profiles.iter().find(|(x, _)| *x == a).unwrap().1;
    let sup_norms: Vec<f64> = cover
        .iter()
        .map(|b| profile_of(b.radius).sup_bound)
        .collect();
    let constant: f64 = 2.0 * sup_norms.iter().sum::<f64>();
    let b1 = 8.0 * r1.sqrt();

    let grid = Arc::new(Grid::build(patch, spacing)?);
    let r_max = barriers.r;
    let evaluated: Vec<Result<(f64, bool)>> = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let (u, v) = grid.coords(n);
            let x = patch.immersion(u, v).unwrap();
            let mut w = constant - b1 * domain.f(&x);
            let mut near = domain.boundary_distance(&x) < b1;
            for b in cover {
                let rho = dist3(&x, &b.center);
                if rho > r_max {
                    return Err(invalid(format!(
                        "ambient distance {rho} exceeds the barrier range {r_max}"
                    )));
                }
                w -= profile_of(b.radius).g_at(rho);
                near |= rho < b.radius;
            }
            Ok((w, near))
        })
        .collect();
    let mut w1 = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    let mut min_w1 = f64::INFINITY;
    for (n, e) in evaluated.into_iter().enumerate() {
        let (w, near) = e?;
        if grid.in_region[n] {
            if !(w > 0.0) {
                return Err(Error::NonPositive(format!(
                    "w1 = {w} at {:?}",
                    grid.coords(n)
                )));
            }
            min_w1 = min_w1.min(w);
            w1.push(w);
        } else {
            // Nodes outside M carry the Dirichlet condition: any positive
            // value there would only lower the quotient.
            w1.push(0.0);
        }
        mask.push(near && grid.in_region[n]);
    }
    let problem = SpectralProblem::with_mask(grid.clone(), &vec![false; grid.len()])?;
    let result = barta_bound(&problem, &w1, Some(&mask))?;
    let ones: Vec<f64> = vec![1.0; grid.len()];
    let baseline = barta_bound(&problem, &ones, Some(&mask))?.value;
    Ok(WitnessReport {
        r1,
        b1,
        k1: cover.len(),
        cover_sum,
        sup_norms,
        min_w1,
        measured_bound: result.value,
        argmin: grid.coords(result.argmin_node),
        nodes: result.nodes,
        predicted_order: 1.0 / r1.sqrt(),
        baseline,
    })
}
