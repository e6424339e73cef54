//! Conformal patches `(U, λ² |dz|²)` with optional immersions into ℝ³.

mod andrade;
mod labyrinth;

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::Point3;

pub use andrade::{
    andrade_curvature, andrade_surface, cylinder_extents, cylinder_extents_closed_form,
    fit_curvature, AndradeParams, CurvatureFit, CurvatureSample, CylinderExtents,
};
pub use labyrinth::{labyrinth_divergence_sums, labyrinth_patch, LabyrinthParams};

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type MapFn = Arc<dyn Fn(f64, f64) -> Point3 + Send + Sync>;
type MaskFn = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

/// A parameter rectangle carrying a conformal factor.
///
/// The patch region is the set of parameter points where `region` holds
/// (the whole rectangle when absent). `boundary_distance` measures how far
/// a parameter point is from the part of the boundary along which the
/// patch escapes to infinity.
#[derive(Clone)]
pub struct ConformalPatch {
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub descriptor: String,
    lambda: ScalarFn,
    immersion: Option<MapFn>,
    region: Option<MaskFn>,
    boundary_distance: Option<ScalarFn>,
}

impl std::fmt::Debug for ConformalPatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalPatch")
            .field("u_range", &self.u_range)
            .field("v_range", &self.v_range)
            .field("descriptor", &self.descriptor)
            .field("immersion", &self.immersion.is_some())
            .finish()
    }
}

impl ConformalPatch {
    pub fn new<F>(
        u_range: [f64; 2],
        v_range: [f64; 2],
        lambda: F,
        descriptor: impl Into<String>,
    ) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(u_range[1] > u_range[0]) || !(v_range[1] > v_range[0]) {
            return Err(invalid("parameter rectangle must have positive extent"));
        }
        Ok(ConformalPatch {
            u_range,
            v_range,
            descriptor: descriptor.into(),
            lambda: Arc::new(lambda),
            immersion: None,
            region: None,
            boundary_distance: None,
        })
    }

    pub fn with_immersion<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, f64) -> Point3 + Send + Sync + 'static,
    {
        self.immersion = Some(Arc::new(f));
        self
    }

    pub fn with_region<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, f64) -> bool + Send + Sync + 'static,
    {
        self.region = Some(Arc::new(f));
        self
    }

    pub fn with_boundary_distance<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.boundary_distance = Some(Arc::new(f));
        self
    }

    /// Same patch with the conformal factor multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let lam = self.lambda.clone();
        let mut out = self.clone();
        out.lambda = Arc::new(move |u, v| c * lam(u, v));
        out.immersion = self.immersion.as_ref().map(|m| {
            let m = m.clone();
            Arc::new(move |u: f64, v: f64| {
                let p = m(u, v);
                [c * p[0], c * p[1], c * p[2]]
            }) as MapFn
        });
        out.descriptor = format!("{} scaled by {c}", self.descriptor);
        out
    }

    #[inline]
    pub fn lambda(&self, u: f64, v: f64) -> f64 {
        (self.lambda)(u, v)
    }

    pub fn has_immersion(&self) -> bool {
        self.immersion.is_some()
    }

    #[inline]
    pub fn immersion(&self, u: f64, v: f64) -> Option<Point3> {
        self.immersion.as_ref().map(|f| f(u, v))
    }

    #[inline]
    pub fn in_region(&self, u: f64, v: f64) -> bool {
        u >= self.u_range[0]
            && u <= self.u_range[1]
            && v >= self.v_range[0]
            && v <= self.v_range[1]
            && self.region.as_ref().is_none_or(|r| r(u, v))
    }

    pub fn boundary_distance(&self, u: f64, v: f64) -> Option<f64> {
        self.boundary_distance.as_ref().map(|f| f(u, v))
    }

    pub fn diameter(&self) -> f64 {
        (self.u_range[1] - self.u_range[0]).hypot(self.v_range[1] - self.v_range[0])
    }

    /// Largest deviation from conformality of the immersion at the given
    /// parameter points, from central differences with step `step`:
    /// `max(| |χ_u|² − λ² |, | |χ_v|² − λ² |, |⟨χ_u, χ_v⟩|) / λ²`.
    pub fn conformality_defect(&self, points: &[(f64, f64)], step: f64) -> Result<f64> {
        let chi = self
            .immersion
            .as_ref()
            .ok_or_else(|| invalid("patch has no immersion"))?;
        let mut worst = 0.0f64;
        for &(u, v) in points {
            let pu = sub(chi(u + step, v), chi(u - step, v));
            let pv = sub(chi(u, v + step), chi(u, v - step));
            let s = 0.5 / step;
            let cu = [pu[0] * s, pu[1] * s, pu[2] * s];
            let cv = [pv[0] * s, pv[1] * s, pv[2] * s];
            let l2 = self.lambda(u, v).powi(2);
            let e = (dot(&cu, &cu) - l2)
                .abs()
                .max((dot(&cv, &cv) - l2).abs())
                .max(dot(&cu, &cv).abs());
            worst = worst.max(e / l2);
        }
        Ok(worst)
    }

    /// Writes `(u, v, λ)` or, with an immersion, `(u, v, λ, x, y, z)` at the
    /// region nodes of a grid with the given spacing.
    pub fn write_grid_csv(&self, spacing: f64, path: &Path) -> Result<()> {
        if !(spacing > 0.0) {
            return Err(invalid("spacing must be positive"));
        }
        let mut w = csv::Writer::from_path(path)?;
        if self.has_immersion() {
            w.write_record(["u", "v", "lambda", "x", "y", "z"])?;
        } else {
            w.write_record(["u", "v", "lambda"])?;
        }
        let nu = ((self.u_range[1] - self.u_range[0]) / spacing).floor() as usize + 1;
        let nv = ((self.v_range[1] - self.v_range[0]) / spacing).floor() as usize + 1;
        for j in 0..nv {
            let v = self.v_range[0] + j as f64 * spacing;
            for i in 0..nu {
                let u = self.u_range[0] + i as f64 * spacing;
                if !self.in_region(u, v) {
                    continue;
                }
                let mut rec = vec![u.to_string(), v.to_string(), self.lambda(u, v).to_string()];
                if let Some(p) = self.immersion(u, v) {
                    rec.extend(p.iter().map(|x| x.to_string()));
                }
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Flat disk of radius `r` with the identity (planar) immersion.
pub fn flat_disk(r: f64) -> Result<ConformalPatch> {
    if !(r > 0.0) {
        return Err(invalid(format!("disk radius must be positive, got {r}")));
    }
    Ok(
        ConformalPatch::new([-r, r], [-r, r], |_, _| 1.0, format!("flat disk R={r}"))?
            .with_immersion(|u, v| [u, v, 0.0])
            .with_region(move |u, v| u * u + v * v < r * r)
            .with_boundary_distance(move |u, v| r - u.hypot(v)),
    )
}

/// Flat rectangle `[u0,u1] × [v0,v1]`, planar immersion.
pub fn flat_rectangle(u_range: [f64; 2], v_range: [f64; 2]) -> Result<ConformalPatch> {
    let [u0, u1] = u_range;
    let [v0, v1] = v_range;
    Ok(ConformalPatch::new(
        u_range,
        v_range,
        |_, _| 1.0,
        format!("flat rectangle [{u0},{u1}]x[{v0},{v1}]"),
    )?
    .with_immersion(|u, v| [u, v, 0.0])
    .with_boundary_distance(move |u, v| (u - u0).min(u1 - u).min(v - v0).min(v1 - v)))
}

/// Poincaré disk `λ = 2/(1 − |z|²)` truncated to `|z| ≤ 1 − ε`.
pub fn hyperbolic_disk(eps: f64) -> Result<ConformalPatch> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(invalid(format!(
            "truncation must lie in (0, 1/4), got {eps}"
        )));
    }
    let rho = 1.0 - eps;
    Ok(ConformalPatch::new(
        [-rho, rho],
        [-rho, rho],
        |u, v| 2.0 / (1.0 - u * u - v * v),
        format!("hyperbolic disk eps={eps}"),
    )?
    .with_region(move |u, v| u * u + v * v <= rho * rho)
    .with_boundary_distance(move |u, v| rho - u.hypot(v)))
}

/// Flat annulus `a < |z| < b` collapsing onto its outer circle: the
/// immersion `z ↦ z` viewed as an escape towards `|z| = b`. Used as a
/// Jordan-curve mock for limit-set sampling.
pub fn circle_mock(a: f64, b: f64) -> Result<ConformalPatch> {
    if !(0.0 <= a && a < b) {
        return Err(invalid("annulus radii must satisfy 0 <= a < b"));
    }
    Ok(
        ConformalPatch::new([-b, b], [-b, b], |_, _| 1.0, format!("annulus {a}<|z|<{b}"))?
            .with_immersion(|u, v| [u, v, 0.0])
            .with_region(move |u, v| {
                let r2 = u * u + v * v;
                r2 > a * a && r2 < b * b
            })
            .with_boundary_distance(move |u, v| b - u.hypot(v)),
    )
}

/// Hyperbolic area of the Euclidean disk `|z| ≤ r` in the Poincaré metric.
pub fn hyperbolic_area_closed_form(r: f64) -> f64 {
    let rho = 2.0 * r.atanh();
    4.0 * PI * (0.5 * rho).sinh().powi(2)
}

/// Samples the immersion at `count` random region points whose boundary
/// distance is below `margin`.
pub fn limit_set_sample(
    patch: &ConformalPatch,
    margin: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Point3>> {
    if !patch.has_immersion() {
        return Err(invalid("limit-set sampling needs an immersion"));
    }
    if patch.boundary_distance.is_none() {
        return Err(invalid("patch declares no escape boundary"));
    }
    if !(margin > 0.0) || count == 0 {
        return Err(invalid("margin and count must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let budget = count.saturating_mul(2000).max(100_000);
    let mut tries = 0usize;
    while out.len() < count {
        if tries >= budget {
            if out.is_empty() {
                return Err(Error::EmptyEscapeRegion);
            }
            break;
        }
        tries += 1;
        let u = rng.random_range(patch.u_range[0]..=patch.u_range[1]);
        let v = rng.random_range(patch.v_range[0]..=patch.v_range[1]);
        if !patch.in_region(u, v) {
            continue;
        }
        let d = patch.boundary_distance(u, v).unwrap();
        if d >= 0.0 && d < margin {
            out.push(patch.immersion(u, v).unwrap());
        }
    }
    Ok(out)
}

/// Writes a point cloud as `x,y,z` CSV.
pub fn write_points_csv(points: &[Point3], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "z"])?;
    for p in points {
        w.write_record(p.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
