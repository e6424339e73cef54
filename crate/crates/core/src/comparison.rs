//! Radial comparison models.
//!
//! A [`RadialModel`] samples the solution of `h'' - G h = 0`, `h(0) = 0`,
//! `h'(0) = 1` on a uniform grid. Everything downstream (barriers, the
//! exponent `theta`, convexity data) is derived from these samples.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{cumulative_hermite, hermite, locate};

/// Upper bound `G` for the radial sectional curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CurvatureBound {
    /// `G ≡ g`. A non-negative `g` corresponds to `B² = g`.
    Constant { g: f64 },
    /// Piecewise-linear interpolation of samples `(times[i], values[i])`,
    /// held constant past either end.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl CurvatureBound {
    pub fn constant(g: f64) -> Self {
        CurvatureBound::Constant { g }
    }

    /// `G ≡ B²`.
    pub fn from_b(b: f64) -> Self {
        CurvatureBound::Constant { g: b * b }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(invalid(
                "tabulated bound needs at least two (t, G) samples of equal length",
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated times must be strictly increasing"));
        }
        for (&t, &v) in times.iter().zip(&values) {
            if !v.is_finite() || !t.is_finite() {
                return Err(Error::NonFiniteCurvature { t, value: v });
            }
        }
        Ok(CurvatureBound::Tabulated { times, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CurvatureBound::Constant { g } => *g,
            CurvatureBound::Tabulated { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[times.len() - 1] {
                    return values[values.len() - 1];
                }
                let i = locate(times, t);
                let s = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
        }
    }

    /// `B` when the bound is a non-negative constant `B²`.
    pub fn b(&self) -> Option<f64> {
        match self {
            CurvatureBound::Constant { g } if *g >= 0.0 => Some(g.sqrt()),
            _ => None,
        }
    }

    /// Checks `G₋(s) ≤ 1/(4 s²)` at the given sample times (those `s ≤ 0`
    /// are skipped). Tabulated bounds are also checked at their own knots.
    pub fn check_negative_part(&self, samples: &[f64]) -> Result<()> {
        let mut ts: Vec<f64> = samples.to_vec();
        if let CurvatureBound::Tabulated { times, .. } = self {
            ts.extend_from_slice(times);
        }
        for s in ts.into_iter().filter(|s| *s > 0.0) {
            let neg = (-self.eval(s)).max(0.0);
            if neg > 1.0 / (4.0 * s * s) * (1.0 + 1e-12) {
                return Err(Error::Constraint(format!(
                    "negative part G_-({s}) = {neg} exceeds 1/(4 s^2) = {}",
                    1.0 / (4.0 * s * s)
                )));
            }
        }
        Ok(())
    }
}

/// Sampled comparison profile.
#[derive(Clone, Debug)]
pub struct RadialModel {
    pub bound: CurvatureBound,
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    pub h_prime: Vec<f64>,
    /// First time at which `h > 0, h' > 0` stops holding, if it happens on
    /// the grid. The time is refined by linear interpolation of `h'`.
    pub h2_failure: Option<f64>,
    pub h_nondecreasing: bool,
}

/// Integrates `h'' = G h` with classical RK4 and a fixed step.
///
/// The last step is shortened so the grid ends exactly at `t_max`.
pub fn solve_h(bound: CurvatureBound, t_max: f64, step: f64) -> Result<RadialModel> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(invalid(format!("t_max must be positive, got {t_max}")));
    }
    let n_steps = (t_max / step - 1e-9).ceil().max(1.0) as usize;
    let g = |t: f64| -> Result<f64> {
        let v = bound.eval(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteCurvature { t, value: v })
        }
    };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut h = Vec::with_capacity(n_steps + 1);
    let mut hp = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    h.push(0.0);
    hp.push(1.0);
    let (mut y, mut yp) = (0.0f64, 1.0f64);
    for k in 0..n_steps {
        let t = k as f64 * step;
        let t_next = if k + 1 == n_steps {
            t_max
        } else {
            (k + 1) as f64 * step
        };
        let dt = t_next - t;
        let g0 = g(t)?;
        let gm = g(t + 0.5 * dt)?;
        let g1 = g(t_next)?;
        let k1y = yp;
        let k1p = g0 * y;
        let k2y = yp + 0.5 * dt * k1p;
        let k2p = gm * (y + 0.5 * dt * k1y);
        let k3y = yp + 0.5 * dt * k2p;
        let k3p = gm * (y + 0.5 * dt * k2y);
        let k4y = yp + dt * k3p;
        let k4p = g1 * (y + dt * k3y);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        yp += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !y.is_finite() || !yp.is_finite() {
            return Err(invalid(format!("solution overflowed at t = {t_next}")));
        }
        times.push(t_next);
        h.push(y);
        hp.push(yp);
    }

    let mut h2_failure = None;
    for i in 1..times.len() {
        if hp[i] <= 0.0 || h[i] <= 0.0 {
            let t_fail = if hp[i] <= 0.0 && hp[i - 1] > 0.0 {
                times[i - 1] + (times[i] - times[i - 1]) * hp[i - 1] / (hp[i - 1] - hp[i])
            } else {
                times[i]
            };
            h2_failure = Some(t_fail);
            break;
        }
    }
    let h_nondecreasing = h.windows(2).all(|w| w[1] >= w[0]);
    Ok(RadialModel {
        bound,
        times,
        h,
        h_prime: hp,
        h2_failure,
        h_nondecreasing,
    })
}

impl RadialModel {
    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Whether `h, h' > 0` on the whole grid past the origin.
    pub fn satisfies_h2(&self) -> bool {
        self.h2_failure.is_none()
    }

    /// `B` for constant non-negative bounds.
    pub fn b(&self) -> Option<f64> {
        self.bound.b()
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.t_max() * (1.0 + 1e-12) {
            return Err(Error::OutOfRange {
                requested: t,
                t_max: self.t_max(),
            });
        }
        Ok(())
    }

    /// `h(t)` by cubic Hermite interpolation.
    pub fn h_at(&self, t: f64) -> f64 {
        let i = locate(&self.times, t);
        hermite(
            self.times[i],
            self.times[i + 1],
            self.h[i],
            self.h[i + 1],
            self.h_prime[i],
            self.h_prime[i + 1],
            t,
        )
    }

    /// `h'(t)` by cubic Hermite interpolation with `h'' = G h`.
    pub fn h_prime_at(&self, t: f64) -> f64 {
        let i = locate(&self.times, t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        hermite(
            t0,
            t1,
            self.h_prime[i],
            self.h_prime[i + 1],
            self.bound.eval(t0) * self.h[i],
            self.bound.eval(t1) * self.h[i + 1],
            t,
        )
    }

    /// `h''(t) = G(t) h(t)`.
    pub fn h_second_at(&self, t: f64) -> f64 {
        self.bound.eval(t) * self.h_at(t)
    }

    /// Writes `(t, h)` and `(t, h')` as two CSV files.
    pub fn write_csv(&self, h_path: &Path, h_prime_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(h_path)?;
        w.write_record(["t", "h"])?;
        for (t, v) in self.times.iter().zip(&self.h) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(h_prime_path)?;
        w.write_record(["t", "h_prime"])?;
        for (t, v) in self.times.iter().zip(&self.h_prime) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `μ(t) = sup_{[0,t]} h/h'`, taken over grid times in `[0, t]` and the
/// interpolated value at `t`.
pub fn mu(model: &RadialModel, t: f64) -> Result<f64> {
    model.check_range(t)?;
    let mut best = 0.0f64;
    for i in 1..model.times.len() {
        let ti = model.times[i];
        if ti > t {
            break;
        }
        if model.h_prime[i] <= 0.0 {
            return Err(Error::MuUndefined { t: ti });
        }
        best = best.max(model.h[i] / model.h_prime[i]);
    }
    if t > 0.0 {
        let hp = model.h_prime_at(t);
        if hp <= 0.0 {
            return Err(Error::MuUndefined { t });
        }
        best = best.max(model.h_at(t) / hp);
    }
    Ok(best)
}

/// Outcome of [`theta`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Theta {
    pub value: f64,
    pub mu: f64,
    /// `false` when `θ ≤ 0`, i.e. the mean curvature is too large.
    pub admissible: bool,
}

/// `θ = m − 1 − m ‖H‖ μ(R)`.
pub fn theta(m: u32, h_norm: f64, r: f64, model: &RadialModel) -> Result<Theta> {
    if m < 2 {
        return Err(invalid(format!("dimension m must be at least 2, got {m}")));
    }
    if !(h_norm >= 0.0) {
        return Err(invalid(format!(
            "mean curvature norm must be non-negative, got {h_norm}"
        )));
    }
    let mu_r = mu(model, r)?;
    let value = (m - 1) as f64 - m as f64 * h_norm * mu_r;
    Ok(Theta {
        value,
        mu: mu_r,
        admissible: value > 0.0,
    })
}

/// Data of the uniformly convex function `F = f(ρ)` on a ball of radius `R`.
#[derive(Clone, Debug)]
pub struct ConvexityData {
    pub times: Vec<f64>,
    /// `f(t) = ∫₀ᵗ h` at `times`.
    pub f: Vec<f64>,
    /// `inf_{[0,R]} h'`.
    pub c: f64,
    pub radius: f64,
}

impl ConvexityData {
    /// `f(t)` by Hermite interpolation with `f' = h`.
    pub fn f_at(&self, h: &RadialModel, t: f64) -> f64 {
        let i = locate(&self.times, t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        hermite(t0, t1, self.f[i], self.f[i + 1], h.h_at(t0), h.h_at(t1), t)
    }
}

/// Samples `f = ∫h` on `[0, R]` and computes `c = min h'`.
pub fn convexity_data(model: &RadialModel, r: f64) -> Result<ConvexityData> {
    if !(r > 0.0) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    model.check_range(r)?;
    let end = model.times.partition_point(|&t| t < r);
    let mut times: Vec<f64> = model.times[..end].to_vec();
    let mut h: Vec<f64> = model.h[..end].to_vec();
    let mut dh: Vec<f64> = model.h_prime[..end].to_vec();
    times.push(r);
    h.push(model.h_at(r));
    dh.push(model.h_prime_at(r));
    let c = dh.iter().cloned().fold(f64::INFINITY, f64::min);
    if c <= 0.0 {
        let t = times[dh.iter().position(|v| *v <= 0.0).unwrap()];
        return Err(Error::MuUndefined { t });
    }
    let f = cumulative_hermite(&times, &h, &dh);
    Ok(ConvexityData {
        times,
        f,
        c,
        radius: r,
    })
}

/// Result of [`check_j_convex`].
#[derive(Clone, Debug, Serialize)]
pub struct JConvexityReport {
    pub j: usize,
    /// Sum of the `j` smallest eigenvalues at each point.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin: usize,
    /// Comparison of `min_margin` against the supplied constant, if any.
    pub passes: Option<bool>,
}

/// Relative asymmetry tolerated before a Hessian sample is rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Evaluates the `j`-convexity margin of a Hessian field at sample points.
pub fn check_j_convex<F>(
    hessian: F,
    j: usize,
    points: &[Vec<f64>],
    c: Option<f64>,
) -> Result<JConvexityReport>
where
    F: Fn(&[f64]) -> DMatrix<f64>,
{
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    let mut margins = Vec::with_capacity(points.len());
    for (idx, p) in points.iter().enumerate() {
        let m = hessian(p);
        let n = m.nrows();
        if m.ncols() != n {
            return Err(invalid("Hessian sample is not square"));
        }
        if j == 0 || j > n {
            return Err(invalid(format!("j must lie in 1..={n}, got {j}")));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric {
                point: idx,
                asymmetry: asym,
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(f64::total_cmp);
        margins.push(ev[..j].iter().sum());
    }
    let (argmin, min_margin) =
        margins
            .iter()
            .cloned()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    Ok(JConvexityReport {
        j,
        margins,
        min_margin,
        argmin,
        passes: c.map(|c| min_margin >= c),
    })
}

/// Verdict of [`nonparabolicity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Decay law fitted to the integrand tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DecayFit {
    /// `q(t) ≈ A t^{-p}`.
    Power {
        amplitude: f64,
        exponent: f64,
        residual: f64,
    },
    /// `q(t) ≈ A e^{-k t}`.
    Exponential {
        amplitude: f64,
        rate: f64,
        residual: f64,
    },
}

impl DecayFit {
    pub fn residual(&self) -> f64 {
        match *self {
            DecayFit::Power { residual, .. } | DecayFit::Exponential { residual, .. } => residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonParabolicity {
    pub verdict: Verdict,
    /// `∫₁^{t_max} h^{1-m}`.
    pub integral: f64,
    /// Extrapolated `∫_{t_max}^∞ h^{1-m}` when the fit says it is finite.
    pub tail: Option<f64>,
    pub fit: Option<DecayFit>,
}

/// Largest fit residual (RMS in log space) accepted for a verdict.
pub const FIT_RESIDUAL_TOL: f64 = 1e-2;
/// Power-law exponents at or above this are treated as convergent.
pub const CONVERGENT_EXPONENT: f64 = 1.05;
/// Power-law exponents at or below this are treated as divergent.
pub const DIVERGENT_EXPONENT: f64 = 1.001;

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icept, rms)
}

/// Tests `∫^∞ h^{1-m} < ∞` from the samples on `[1, t_max]`.
///
/// The integrand on the window `[√t_max, t_max]` (the last half of the
/// decades) is fitted by a power law and by an exponential; the better fit
/// decides and extrapolates the tail.
pub fn nonparabolicity_check(model: &RadialModel, m: u32) -> Result<NonParabolicity> {
    if m < 2 {
        return Err(invalid(format!("dimension m must be at least 2, got {m}")));
    }
    if let Some(t) = model.h2_failure {
        return Err(Error::Constraint(format!(
            "model leaves the (H2) regime at t = {t}"
        )));
    }
    let t_max = model.t_max();
    if t_max <= 1.0 {
        return Ok(NonParabolicity {
            verdict: Verdict::Inconclusive,
            integral: 0.0,
            tail: None,
            fit: None,
        });
    }
    let p = (m - 1) as i32;
    let start = model.times.partition_point(|&t| t < 1.0);
    let mut ts = vec![1.0];
    let mut qs = vec![model.h_at(1.0).powi(-p)];
    for i in start..model.times.len() {
        if model.times[i] > 1.0 {
            ts.push(model.times[i]);
            qs.push(model.h[i].powi(-p));
        }
    }
    let integral = crate::quad::cumulative_trapezoid(&ts, &qs)
        .last()
        .cloned()
        .unwrap_or(0.0);
    if t_max < 100.0 {
        return Ok(NonParabolicity {
            verdict: Verdict::Inconclusive,
            integral,
            tail: None,
            fit: None,
        });
    }

    let lo = t_max.sqrt();
    let mut win_t = Vec::new();
    let mut win_lq = Vec::new();
    for (t, q) in ts.iter().zip(&qs) {
        if *t >= lo && *q > 0.0 && q.is_finite() {
            win_t.push(*t);
            win_lq.push(q.ln());
        }
    }
    if win_t.len() < 8 {
        return Ok(NonParabolicity {
            verdict: Verdict::Inconclusive,
            integral,
            tail: None,
            fit: None,
        });
    }
    let log_t: Vec<f64> = win_t.iter().map(|t| t.ln()).collect();
    let (ps, pi, pr) = linear_fit(&log_t, &win_lq);
    let (es, ei, er) = linear_fit(&win_t, &win_lq);
    let power = DecayFit::Power {
        amplitude: pi.exp(),
        exponent: -ps,
        residual: pr,
    };
    let expo = DecayFit::Exponential {
        amplitude: ei.exp(),
        rate: -es,
        residual: er,
    };
    let fit = if er < pr { expo } else { power };
    if fit.residual() > FIT_RESIDUAL_TOL {
        return Ok(NonParabolicity {
            verdict: Verdict::Inconclusive,
            integral,
            tail: None,
            fit: Some(fit),
        });
    }
    let (verdict, tail) = match fit {
        DecayFit::Power {
            amplitude,
            exponent,
            ..
        } => {
            if exponent >= CONVERGENT_EXPONENT {
                (
                    Verdict::Convergent,
                    Some(amplitude * t_max.powf(1.0 - exponent) / (exponent - 1.0)),
                )
            } else if exponent <= DIVERGENT_EXPONENT {
                (Verdict::Divergent, None)
            } else {
                (Verdict::Inconclusive, None)
            }
        }
        DecayFit::Exponential {
            amplitude, rate, ..
        } => {
            if rate > 0.0 {
                (
                    Verdict::Convergent,
                    Some(amplitude * (-rate * t_max).exp() / rate),
                )
            } else {
                (Verdict::Divergent, None)
            }
        }
    };
    Ok(NonParabolicity {
        verdict,
        integral,
        tail,
        fit: Some(fit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_and_hyperbolic_closed_forms() {
        let flat = solve_h(CurvatureBound::constant(0.0), 5.0, 1e-3).unwrap();
        for (t, (h, hp)) in flat.times.iter().zip(flat.h.iter().zip(&flat.h_prime)) {
            assert_relative_eq!(*h, *t, epsilon = 1e-12);
            assert_relative_eq!(*hp, 1.0, epsilon = 1e-12);
        }
        let hyp = solve_h(CurvatureBound::from_b(1.0), 5.0, 1e-3).unwrap();
        for (t, h) in hyp.times.iter().zip(&hyp.h).skip(1) {
            assert!((h - t.sinh()).abs() / t.sinh() < 1e-6);
        }
        assert!(hyp.satisfies_h2() && hyp.h_nondecreasing);
    }

    #[test]
    fn sphere_model_fails_h2_at_half_pi() {
        let m = solve_h(CurvatureBound::constant(-1.0), 3.0, 1e-3).unwrap();
        let t = m.h2_failure.unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{t}");
        assert_relative_eq!(mu(&m, 1.0).unwrap(), 1f64.tan(), max_relative = 1e-8);
        assert!(matches!(mu(&m, 2.0), Err(Error::MuUndefined { .. })));
    }

    #[test]
    fn mu_and_theta_examples() {
        let flat = solve_h(CurvatureBound::constant(0.0), 5.0, 1e-3).unwrap();
        assert_relative_eq!(mu(&flat, 2.5).unwrap(), 2.5, epsilon = 1e-12);
        let hyp = solve_h(CurvatureBound::from_b(1.0), 5.0, 1e-3).unwrap();
        assert_relative_eq!(mu(&hyp, 5.0).unwrap(), 0.999_909_2, epsilon = 1e-7);
        assert_eq!(theta(2, 0.0, 1.0, &flat).unwrap().value, 1.0);
        let th = theta(3, 0.1, 2.0, &flat).unwrap();
        assert_relative_eq!(th.value, 1.4, epsilon = 1e-12);
        assert!(th.admissible);
        assert!(!theta(2, 1.0, 3.0, &flat).unwrap().admissible);
        assert!(theta(1, 0.0, 1.0, &flat).is_err());
    }

    #[test]
    fn convexity_examples() {
        let flat = solve_h(CurvatureBound::constant(0.0), 5.0, 1e-3).unwrap();
        let cd = convexity_data(&flat, 1.0).unwrap();
        assert_eq!(cd.c, 1.0);
        assert_relative_eq!(*cd.f.last().unwrap(), 0.5, epsilon = 1e-12);
        let hyp = solve_h(CurvatureBound::from_b(1.0), 5.0, 1e-3).unwrap();
        let cd = convexity_data(&hyp, 2.0).unwrap();
        assert_relative_eq!(cd.c, 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            *cd.f.last().unwrap(),
            2f64.cosh() - 1.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            cd.f_at(&hyp, 1.2345),
            1.2345f64.cosh() - 1.0,
            max_relative = 1e-9
        );
        let sph = solve_h(CurvatureBound::constant(-1.0), 3.0, 1e-3).unwrap();
        assert_relative_eq!(
            convexity_data(&sph, 1.0).unwrap().c,
            1f64.cos(),
            epsilon = 1e-9
        );
        assert!(matches!(
            convexity_data(&flat, 6.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn j_convexity_examples() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0, 0.0], vec![1.0, -2.0, 0.5]];
        let r = check_j_convex(|_| DMatrix::identity(3, 3), 1, &pts, Some(1.0)).unwrap();
        assert_eq!(r.min_margin, 1.0);
        assert_eq!(r.passes, Some(true));
        let saddle =
            |_: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, -2.0, 0.0]));
        let r = check_j_convex(saddle, 2, &pts, Some(0.0)).unwrap();
        assert_relative_eq!(r.min_margin, -2.0, epsilon = 1e-12);
        assert_eq!(r.passes, Some(false));
        let bad = |_: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            check_j_convex(bad, 1, &pts, None),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn nonparabolicity_examples() {
        let flat = solve_h(CurvatureBound::constant(0.0), 200.0, 1e-2).unwrap();
        assert_eq!(
            nonparabolicity_check(&flat, 3).unwrap().verdict,
            Verdict::Convergent
        );
        assert_eq!(
            nonparabolicity_check(&flat, 2).unwrap().verdict,
            Verdict::Divergent
        );
        let hyp = solve_h(CurvatureBound::from_b(1.0), 120.0, 1e-2).unwrap();
        let np = nonparabolicity_check(&hyp, 2).unwrap();
        assert_eq!(np.verdict, Verdict::Convergent);
        // ∫₁^∞ 1/sinh = -ln tanh(1/2)
        let exact = -(0.5f64.tanh().ln());
        assert!((np.integral + np.tail.unwrap() - exact).abs() < 1e-4);
        let short = solve_h(CurvatureBound::constant(0.0), 50.0, 1e-2).unwrap();
        assert_eq!(
            nonparabolicity_check(&short, 3).unwrap().verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn negative_part_condition() {
        let ok = CurvatureBound::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, -0.2, -0.05, -0.01])
            .unwrap();
        assert!(ok.check_negative_part(&[0.5]).is_ok());
        assert!(CurvatureBound::constant(-1.0)
            .check_negative_part(&[0.1, 1.0])
            .is_err());
        assert!(CurvatureBound::tabulated(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
    }
}
