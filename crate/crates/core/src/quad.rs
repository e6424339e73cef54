//! Small quadrature helpers shared across modules.

/// Cumulative trapezoidal integral of samples `y` over abscissae `x`.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Cumulative integral using cubic Hermite panels, exact for cubics.
///
/// `dy` holds the derivative of the integrand at each abscissa.
pub fn cumulative_hermite(x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        let h = x[i] - x[i - 1];
        acc += 0.5 * h * (y[i] + y[i - 1]) + h * h / 12.0 * (dy[i - 1] - dy[i]);
        out.push(acc);
    }
    out
}

/// Cubic Hermite interpolation on `[x0, x1]`.
#[inline]
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return y0;
    }
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Index `i` of the panel `[x[i], x[i+1]]` containing `t` (clamped).
pub fn locate(x: &[f64], t: f64) -> usize {
    if x.len() < 2 || t <= x[0] {
        return 0;
    }
    let last = x.len() - 2;
    match x.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => i.min(last),
        Err(i) => (i - 1).min(last),
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Split into panels first so narrow features are not missed by the
    // initial Simpson estimate.
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == panels { b } else { lo + h };
            let fa = f(lo);
            let fb = f(hi);
            let fm = f(0.5 * (lo + hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            recurse(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Integral of `f` over `[a, +inf)` through the map `t = a + x / (1 - x)`.
///
/// The integrand must decay fast enough for the mapped integrand to stay
/// bounded near `x = 1`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> f64 {
    let mapped = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - x;
        let t = a + x / one_minus;
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adaptive_simpson(&mapped, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_panels_integrate_cubics_exactly() {
        let x: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|t| t * t * t - t).collect();
        let dy: Vec<f64> = x.iter().map(|t| 3.0 * t * t - 1.0).collect();
        let c = cumulative_hermite(&x, &y, &dy);
        let t = x[10];
        let exact = t.powi(4) / 4.0 - t * t / 2.0;
        assert!((c[10] - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_and_infinite_tail() {
        let v = adaptive_simpson(&|t: f64| t.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
        let tail = integrate_to_infinity(&|t: f64| 1.0 / (t * t), 1.0, 1e-12);
        assert!((tail - 1.0).abs() < 1e-9);
    }

    #[test]
    fn locate_clamps() {
        let x = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(locate(&x, -1.0), 0);
        assert_eq!(locate(&x, 1.5), 1);
        assert_eq!(locate(&x, 3.0), 2);
        assert_eq!(locate(&x, 7.0), 2);
    }
}
