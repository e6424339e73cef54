//! The Andrade minimal surface: a bounded complete minimal immersion of the
//! strip `|Re z| < 1` whose limit set has non-empty interior.

use num_complex::Complex64;
use serde::Serialize;

use super::ConformalPatch;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AndradeParams {
    pub r1: f64,
    pub r2: f64,
}

impl AndradeParams {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > 0.0 && r1 < r2) {
            return Err(invalid(format!(
                "Andrade radii need 0 < r1 < r2, got r1={r1}, r2={r2}"
            )));
        }
        Ok(AndradeParams { r1, r2 })
    }

    pub fn d(&self) -> f64 {
        self.r2 - self.r1
    }

    fn alpha(&self) -> f64 {
        self.r1 / (2.0 * self.r2)
    }

    fn k_height(&self) -> f64 {
        let d = self.d();
        4.0 * (d / self.r2).sqrt() * (self.r2 / self.r1) * d
    }

    /// `L(z) = (r1 − r2) eᶻ`.
    pub fn big_l(&self, z: Complex64) -> Complex64 {
        (self.r1 - self.r2) * z.exp()
    }

    /// `H(z) = −d e^{(r1/r2 − 1) z}`.
    pub fn big_h(&self, z: Complex64) -> Complex64 {
        -self.d() * ((self.r1 / self.r2 - 1.0) * z).exp()
    }

    pub fn big_l_prime(&self, z: Complex64) -> Complex64 {
        self.big_l(z)
    }

    pub fn big_h_prime(&self, z: Complex64) -> Complex64 {
        (self.r1 / self.r2 - 1.0) * self.big_h(z)
    }

    /// Height function `h(z) = K Re(i e^{αz})`.
    pub fn height(&self, z: Complex64) -> f64 {
        self.k_height() * (Complex64::i() * (self.alpha() * z).exp()).re
    }

    /// `∂h/∂z` of the (real, harmonic) height function.
    pub fn height_dz(&self, z: Complex64) -> Complex64 {
        0.5 * self.k_height() * self.alpha() * Complex64::i() * (self.alpha() * z).exp()
    }

    /// `χ(z) = (L(z) − conj(H(z)), h(z)) ∈ ℂ × ℝ`.
    pub fn chi(&self, u: f64, v: f64) -> [f64; 3] {
        let z = Complex64::new(u, v);
        let w = self.big_l(z) - self.big_h(z).conj();
        [w.re, w.im, self.height(z)]
    }

    /// `λ = |L′| + |H′|`.
    pub fn lambda(&self, u: f64) -> f64 {
        let d = self.d();
        d * u.exp() + d * d / self.r2 * ((self.r1 / self.r2 - 1.0) * u).exp()
    }

    /// Relative defect `|L′H′ − (∂h/∂z)²| / |L′H′|` at `z`.
    pub fn conformality_residual(&self, z: Complex64) -> f64 {
        let lh = self.big_l_prime(z) * self.big_h_prime(z);
        let hz = self.height_dz(z);
        (lh - hz * hz).norm() / lh.norm()
    }

    /// Gaussian curvature from the closed form of `λ`.
    pub fn curvature_exact(&self, u: f64) -> f64 {
        let (a, b, kappa) = self.curvature_coefficients();
        -a * b * (1.0 + kappa).powi(2) * ((1.0 - kappa) * u).exp() / self.lambda(u).powi(4)
    }

    /// `(A, B, κ)` with `λ = A eᵘ + B e^{−κu}`.
    fn curvature_coefficients(&self) -> (f64, f64, f64) {
        let d = self.d();
        (d, d * d / self.r2, 1.0 - self.r1 / self.r2)
    }

    /// The constants `(c₁, c₂)` of `K = −c₁ (e^{(1−r1/4r2)u} + c₂ e^{(3r1/4r2−1)u})^{-4}`.
    pub fn curvature_constants(&self) -> (f64, f64) {
        let (a, b, kappa) = self.curvature_coefficients();
        (b * (1.0 + kappa).powi(2) / a.powi(3), b / a)
    }
}

/// Strip `|u| ≤ u_half_width`, `|v| ≤ v_extent` of the Andrade surface.
pub fn andrade_surface(
    params: AndradeParams,
    u_half_width: f64,
    v_extent: f64,
) -> Result<ConformalPatch> {
    AndradeParams::new(params.r1, params.r2)?;
    if !(u_half_width > 0.0 && u_half_width <= 1.0) {
        return Err(invalid(format!(
            "u half-width must lie in (0, 1], got {u_half_width}"
        )));
    }
    if !(v_extent > 0.0) {
        return Err(invalid(format!(
            "v extent must be positive, got {v_extent}"
        )));
    }
    let p = params;
    Ok(ConformalPatch::new(
        [-u_half_width, u_half_width],
        [-v_extent, v_extent],
        move |u, _| p.lambda(u),
        format!(
            "Andrade r1={} r2={} |u|<={u_half_width} |v|<={v_extent}",
            p.r1, p.r2
        ),
    )?
    .with_immersion(move |u, v| p.chi(u, v))
    .with_boundary_distance(move |_, v| v_extent - v.abs()))
}

/// Curvature of the conformal metric at `z`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureSample {
    /// `−λ⁻² Δ log λ` from central differences of `log λ` in `u` and `v`.
    pub finite_difference: f64,
    pub exact: f64,
}

/// Curvature at `(u, v)` from a 5-point stencil of step `step`.
pub fn andrade_curvature(params: &AndradeParams, u: f64, v: f64, step: f64) -> CurvatureSample {
    // λ is evaluated through the patch formula in both variables so that
    // the v-independence is a property of the computation, not an input.
    let lam = |u: f64, v: f64| {
        let z = Complex64::new(u, v);
        params.big_l_prime(z).norm() + params.big_h_prime(z).norm()
    };
    let l0 = lam(u, v).ln();
    let lap = (lam(u + step, v).ln()
        + lam(u - step, v).ln()
        + lam(u, v + step).ln()
        + lam(u, v - step).ln()
        - 4.0 * l0)
        / (step * step);
    CurvatureSample {
        finite_difference: -lap / lam(u, v).powi(2),
        exact: params.curvature_exact(u),
    }
}

/// Least-squares fit of `(c₁, c₂)` to curvature samples.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureFit {
    pub c1: f64,
    pub c2: f64,
    /// Largest relative deviation of the fitted form from the samples.
    pub residual: f64,
}

/// Fits the two-constant curvature law to samples `(u, K)`.
///
/// `(−K)^{−1/4} = p e₁(u) + q e₂(u)` is linear in `p = c₁^{−1/4}` and
/// `q = c₁^{−1/4} c₂`.
pub fn fit_curvature(params: &AndradeParams, samples: &[(f64, f64)]) -> Result<CurvatureFit> {
    if samples.len() < 2 || samples.iter().any(|(_, k)| !(*k < 0.0)) {
        return Err(invalid("curvature fit needs at least two negative samples"));
    }
    let rho = params.r1 / params.r2;
    let e1 = |u: f64| ((1.0 - rho / 4.0) * u).exp();
    let e2 = |u: f64| ((0.75 * rho - 1.0) * u).exp();
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, k) in samples {
        let y = (-k).powf(-0.25);
        let (a1, a2) = (e1(u), e2(u));
        s11 += a1 * a1;
        s12 += a1 * a2;
        s22 += a2 * a2;
        b1 += a1 * y;
        b2 += a2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * s11 * s22 {
        return Err(invalid("curvature samples do not determine the fit"));
    }
    let p = (s22 * b1 - s12 * b2) / det;
    let q = (s11 * b2 - s12 * b1) / det;
    let c1 = p.powi(-4);
    let c2 = q / p;
    let residual = samples
        .iter()
        .map(|&(u, k)| {
            let model = -c1 * (e1(u) + c2 * e2(u)).powi(-4);
            ((model - k) / k).abs()
        })
        .fold(0.0, f64::max);
    Ok(CurvatureFit { c1, c2, residual })
}

/// Extents of the trochoid curve `v ↦ χ(u + iv)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderExtents {
    pub u: f64,
    /// Largest horizontal radius.
    pub s1: f64,
    /// Smallest horizontal radius.
    pub s2: f64,
    /// Largest `|height|`.
    pub l: f64,
}

/// Measures the cylinder shell containing `Γ_u` from `samples` values of
/// `v` in `[−v_extent, v_extent]`.
pub fn cylinder_extents(
    params: &AndradeParams,
    u: f64,
    v_extent: f64,
    samples: usize,
) -> CylinderExtents {
    let mut s1 = 0.0f64;
    let mut s2 = f64::INFINITY;
    let mut l = 0.0f64;
    let n = samples.max(2);
    for k in 0..n {
        let v = -v_extent + 2.0 * v_extent * k as f64 / (n - 1) as f64;
        let p = params.chi(u, v);
        let r = p[0].hypot(p[1]);
        s1 = s1.max(r);
        s2 = s2.min(r);
        l = l.max(p[2].abs());
    }
    CylinderExtents { u, s1, s2, l }
}

/// Closed forms `s₁ = A + B`, `s₂ = |A − B|`, `l = K e^{αu}` with
/// `A = d eᵘ`, `B = d e^{(r1/r2 − 1)u}`.
pub fn cylinder_extents_closed_form(params: &AndradeParams, u: f64) -> CylinderExtents {
    let d = params.d();
    let a = d * u.exp();
    let b = d * ((params.r1 / params.r2 - 1.0) * u).exp();
    CylinderExtents {
        u,
        s1: a + b,
        s2: (a - b).abs(),
        l: params.k_height() * (params.alpha() * u).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> AndradeParams {
        AndradeParams::new((5f64.sqrt() - 1.0) / 2.0, 1.0).unwrap()
    }

    #[test]
    fn lambda_matches_derivative_moduli_and_metric() {
        let p = golden();
        let patch = andrade_surface(p, 1.0, 10.0).unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.7, -3.1), (-0.9, 5.5)] {
            let z = Complex64::new(u, v);
            let direct = p.big_l_prime(z).norm() + p.big_h_prime(z).norm();
            assert!((patch.lambda(u, v) - direct).abs() < 1e-14);
        }
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|k| (-0.9 + 0.09 * k as f64, -8.0 + 0.8 * k as f64))
            .collect();
        assert!(patch.conformality_defect(&pts, 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn infimum_of_lambda_is_below_twice_d() {
        // The conformal factor at u = 0 is d(1 + d/r2), strictly less than 2d.
        let p = golden();
        let inf = (0..=2000)
            .map(|k| p.lambda(-1.0 + k as f64 * 1e-3))
            .fold(f64::INFINITY, f64::min);
        assert!(inf < 2.0 * p.d());
        assert!((p.lambda(0.0) - p.d() * (1.0 + p.d() / p.r2)).abs() < 1e-15);
    }

    #[test]
    fn curvature_closed_form_and_fit() {
        let p = golden();
        let samples: Vec<(f64, f64)> = (0..41)
            .map(|k| {
                let u = -1.0 + 0.05 * k as f64;
                (u, andrade_curvature(&p, u, 0.3, 1e-3).finite_difference)
            })
            .collect();
        for &(u, k) in &samples {
            assert!(k < 0.0);
            assert!(((k - p.curvature_exact(u)) / k).abs() < 1e-5);
        }
        let fit = fit_curvature(&p, &samples).unwrap();
        let (c1, c2) = p.curvature_constants();
        assert!(((fit.c1 - c1) / c1).abs() < 1e-4, "{} vs {c1}", fit.c1);
        assert!(((fit.c2 - c2) / c2).abs() < 1e-4);
        assert!(fit.residual < 1e-5);
    }

    #[test]
    fn cylinder_extents_match_closed_forms() {
        let p = golden();
        for &u in &[-0.8, 0.0, 0.5] {
            let m = cylinder_extents(&p, u, 400.0, 400_000);
            let c = cylinder_extents_closed_form(&p, u);
            assert!(m.s1 <= c.s1 + 1e-12 && (m.s1 - c.s1) / c.s1 > -1e-3);
            assert!(m.s2 >= c.s2 - 1e-12 && (m.s2 - c.s2).abs() < 1e-3);
            assert!(m.l <= c.l + 1e-12 && (m.l - c.l) / c.l > -1e-4);
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(AndradeParams::new(1.0, 1.0).is_err());
        assert!(andrade_surface(AndradeParams { r1: 2.0, r2: 1.0 }, 1.0, 1.0).is_err());
        assert!(andrade_surface(golden(), 1.5, 1.0).is_err());
    }
}
