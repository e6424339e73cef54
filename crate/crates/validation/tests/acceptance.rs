//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use speclab::comparison::{convexity_data, mu, solve_h, CurvatureBound};
use speclab::hausdorff::{
    dyadic_schedule, measure_limit, Gauge, MeasureVerdict, PointCloud, Strategy,
};
use speclab::spectrum::{
    ball_property_check, barta_bound, barta_witness, discretize, persson_sweep_on, smallest_eigs,
    ConvexDomain, CoverBall, EigOptions, Grid, RegionFn, WitnessBarriers,
};
use speclab::subharmonic::{
    build_barrier, default_gauge_s, verify_subharmonic, verify_subharmonic_analytic,
};
use speclab::surfaces::{
    andrade_curvature, andrade_surface, flat_disk, hyperbolic_disk, labyrinth_patch, AndradeParams,
    LabyrinthParams,
};

type Check = Result<(bool, String), speclab::Error>;

const J01_SQ: f64 = 5.783185962946784;

fn golden() -> AndradeParams {
    AndradeParams::new((5f64.sqrt() - 1.0) / 2.0, 1.0).unwrap()
}

fn ode_oracle() -> Check {
    let m = solve_h(CurvatureBound::constant(1.0), 5.0, 1e-3)?;
    let err = m
        .times
        .iter()
        .zip(&m.h)
        .skip(1)
        .map(|(t, h)| (h / t.sinh() - 1.0).abs())
        .fold(0.0, f64::max);
    let mu_err = (mu(&m, 5.0)? / 5f64.tanh() - 1.0).abs();
    Ok((
        err <= 1e-6 && mu_err <= 1e-6,
        format!("max rel err vs sinh {err:.2e}, mu(5) vs tanh(5) {mu_err:.2e}"),
    ))
}

fn disk_eigenvalue() -> Check {
    let mut rel = Vec::new();
    for dx in [1.0 / 256.0, 1.0 / 512.0] {
        let p = discretize(&flat_disk(1.0)?, dx, None)?;
        let r = smallest_eigs(&p, &EigOptions::default())?;
        rel.push((r.eigenvalues[0] / J01_SQ - 1.0).abs());
    }
    Ok((
        rel[0] <= 0.01 && rel[1] <= 0.0025,
        format!(
            "rel err {:.3}% at 1/256, {:.3}% at 1/512",
            100.0 * rel[0],
            100.0 * rel[1]
        ),
    ))
}

fn barta_equality() -> Check {
    let patches = [
        (flat_disk(1.0)?, 1.0 / 128.0),
        (hyperbolic_disk(0.01)?, 1.0 / 128.0),
        (andrade_surface(golden(), 1.0, 3.0)?, 1.0 / 64.0),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (patch, dx) in &patches {
        let p = discretize(patch, *dx, None)?;
        let r = smallest_eigs(&p, &EigOptions::default())?;
        let b = barta_bound(&p, &p.to_grid(&r.vectors[0]), None)?;
        let d = (b.value - r.eigenvalues[0]).abs();
        worst = worst.max(d);
        parts.push(format!("{:.2e}", d));
    }
    Ok((
        worst <= 1e-8,
        format!(
            "|barta - mu1| = {} (flat, hyperbolic, Andrade)",
            parts.join(", ")
        ),
    ))
}

fn subharmonic_flat() -> Check {
    let m = solve_h(CurvatureBound::constant(0.0), 1.5, 1e-3)?;
    let (theta, a) = (1.0, 0.25);
    let profile = build_barrier(&m, theta, a, &default_gauge_s(theta)?, 1.0)?;
    let patch = flat_disk(1.0)?;
    let x0 = [0.1, -0.05, 0.0];
    let an = verify_subharmonic_analytic(&patch, 1.0 / 128.0, x0, &profile)?;
    let di = verify_subharmonic(&patch, 1.0 / 256.0, x0, &profile)?;
    let e_an = an.inside.max_relative_deviation(2.0);
    let e_di = di.inside.max_relative_deviation(2.0);
    let slack = an.outside.min_slack.min(di.outside.min_slack);
    Ok((
        e_an <= 1e-6 && e_di <= 1e-2 && slack >= -1e-2,
        format!("inside: analytic {e_an:.2e}, discrete {e_di:.2e}; outside min slack {slack:.3e}"),
    ))
}

fn sup_bound_scaling() -> Check {
    let m = solve_h(CurvatureBound::constant(0.0), 1.5, 1e-3)?;
    let mut spreads = Vec::new();
    for (theta, gauge) in [
        (1.0, (|a: f64| a * a * a.ln().abs()) as fn(f64) -> f64),
        (2.0, |a: f64| a * a),
    ] {
        let s = default_gauge_s(theta)?;
        let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&a| build_barrier(&m, theta, a, &s, 1.0).map(|p| p.sup_bound / gauge(a)))
            .collect::<Result<_, _>>()?;
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        spreads.push(hi / lo);
    }
    Ok((
        spreads.iter().all(|&s| s < 2.0),
        format!(
            "max/min of g(R)/gauge: {:.3} (theta=1), {:.3} (theta=2)",
            spreads[0], spreads[1]
        ),
    ))
}

fn hausdorff_verdicts() -> Check {
    let seg = PointCloud::segment(100_000);
    let g = Gauge::square_log(0.25)?;
    let rep = measure_limit(&seg, &g, &dyadic_schedule(4.0, 10.0, 1.0), Strategy::Grid)?;
    let last = *rep.sums.last().unwrap();
    let decreasing = rep.sums.windows(2).all(|w| w[1] < w[0]);
    let sq = PointCloud::square_lattice(316);
    let rep2 = measure_limit(
        &sq,
        &Gauge::square(0.25)?,
        &dyadic_schedule(3.0, 6.5, 0.5),
        Strategy::Grid,
    )?;
    let lower = 4.0 / PI;
    let lo = rep2.sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rep2.sums.iter().cloned().fold(0.0, f64::max);
    let packing_ok = rep2.packing_lower_bound.is_some_and(|b| b <= lo);
    Ok((
        last <= 0.02 && decreasing && rep.verdict == MeasureVerdict::Vanishing && lo >= lower && hi <= 2.5 && packing_ok,
        format!(
            "segment sum {last:.4} at 2^-10 ({:?}); square sums in [{lo:.3}, {hi:.3}], packing bound {:.3}",
            rep.verdict,
            rep2.packing_lower_bound.unwrap_or(f64::NAN)
        ),
    ))
}

fn ball_property() -> Check {
    let grid = Grid::build(&flat_disk(1.2)?, 1.0 / 128.0)?;
    let rep = ball_property_check(&grid, &[(0.0, 0.0)], 1.0, 0.5)?;
    let lambda = 1.1 * rep.c / 0.25;
    let negative = rep.i_lambda(lambda).iter().all(|&i| i < 0.0);
    let mut cs = Vec::new();
    for n in 1..=6 {
        let params = LabyrinthParams::harmonic(n, [0.2, 0.1]);
        let patch = labyrinth_patch(params)?;
        let grid = Grid::build(&patch, params.r_n / 128.0)?;
        let (u, v) = (1.0 + 0.5 * params.r_n, 0.0);
        let r = 0.35 * params.r_n * params.lambda(u, v);
        cs.push(ball_property_check(&grid, &[(u, v)], r, 0.5)?.c);
    }
    let hi = cs.iter().cloned().fold(0.0, f64::max);
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        (rep.c / 4.0 - 1.0).abs() <= 0.1 && negative && hi / lo <= 1.5,
        format!(
            "flat C = {:.3}, I_lambda < 0: {negative}; annuli C in [{lo:.3}, {hi:.3}]",
            rep.c
        ),
    ))
}

/// Discs `|z| ≤ edge − 2^{−l}`.
fn radial_exhaustion(
    edge: f64,
    levels: std::ops::RangeInclusive<i32>,
) -> Vec<Box<dyn Fn(f64, f64) -> bool + Sync>> {
    levels
        .map(|l| Box::new(move |u: f64, v: f64| u.hypot(v) <= edge - 0.5f64.powi(l)) as _)
        .collect()
}

fn persson_contrast() -> Check {
    let opts = EigOptions {
        tol: 1e-6,
        ..Default::default()
    };
    let eps = 1e-2;
    let ks = radial_exhaustion(1.0 - eps, 1..=6);
    let refs: Vec<RegionFn> = ks.iter().map(|k| k.as_ref() as RegionFn).collect();
    let hyp = Arc::new(Grid::build(&hyperbolic_disk(eps)?, 1.0 / 512.0)?);
    let a = persson_sweep_on(hyp, &refs, &opts)?;
    let pass_a = a.sup >= 0.20 && a.sup <= 0.35;

    let ks = radial_exhaustion(1.0, 1..=6);
    let refs: Vec<RegionFn> = ks.iter().map(|k| k.as_ref() as RegionFn).collect();
    let flat = Arc::new(Grid::build(&flat_disk(1.0)?, 1.0 / 512.0)?);
    let b = persson_sweep_on(flat, &refs, &opts)?;
    let pass_b = b.values[5] > 10.0 * b.values[0];

    let patch = andrade_surface(golden(), 1.0, 40.0)?;
    let grid = Arc::new(Grid::build(&patch, 1.0 / 32.0)?);
    let strips: Vec<Box<dyn Fn(f64, f64) -> bool + Sync>> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&l| Box::new(move |_: f64, v: f64| v.abs() <= l) as _)
        .collect();
    let srefs: Vec<RegionFn> = strips.iter().map(|k| k.as_ref() as RegionFn).collect();
    let c = persson_sweep_on(
        grid.clone(),
        &srefs,
        &EigOptions {
            block: Some(8),
            tol: 1e-6,
            ..Default::default()
        },
    )?;
    let balls = ball_property_check(&grid, &[(0.0, -37.0), (0.0, 37.0)], 0.35, 0.5)?;
    let pass_c = c.values.iter().all(|&v| v <= 2.0 * balls.bound);

    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok((
        pass_a && pass_b && pass_c,
        format!(
            "(a) {} sup {:.3} [{}]; (b) {} ratio {:.1}; (c) {} max {:.3} vs bound {:.1}",
            if pass_a { "pass" } else { "FAIL" },
            a.sup,
            fmt(&a.values),
            if pass_b { "pass" } else { "FAIL" },
            b.values[5] / b.values[0],
            if pass_c { "pass" } else { "FAIL" },
            c.sup,
            balls.bound
        ),
    ))
}

fn witness_trend() -> Check {
    let model = solve_h(CurvatureBound::from_b(0.0), 2.5, 1e-3)?;
    let data = convexity_data(&model, 1.0)?;
    let domain = ConvexDomain::from_convexity(&data, &model, [0.0; 3]);
    let patch = flat_disk(1.0)?;
    let barriers = WitnessBarriers {
        model: &model,
        theta: 1.0,
        r: 2.0,
    };
    let mut bounds = Vec::new();
    for r1 in [0.005, 0.0025, 0.00125] {
        let cover = [
            CoverBall {
                center: [0.5, 0.0, 0.0],
                radius: r1,
            },
            CoverBall {
                center: [-0.5, 0.0, 0.0],
                radius: r1,
            },
        ];
        bounds.push(
            barta_witness(&patch, 1.0 / 2048.0, &domain, &cover, r1, &barriers)?.measured_bound,
        );
    }
    let ratios: Vec<f64> = bounds.windows(2).map(|w| w[1] / w[0]).collect();
    Ok((
        ratios.iter().all(|&q| q >= 1.2),
        format!(
            "inf(-Lw)/w = {}; ratios {}",
            bounds
                .iter()
                .map(|b| format!("{b:.2}"))
                .collect::<Vec<_>>()
                .join(", "),
            ratios
                .iter()
                .map(|q| format!("{q:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

fn andrade_consistency() -> Check {
    let p = golden();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)))
        .collect();
    let conf = pts
        .iter()
        .map(|&(u, v)| p.conformality_residual(Complex64::new(u, v)))
        .fold(0.0, f64::max);
    let h = 1e-3;
    let harm = pts
        .iter()
        .map(|&(u, v)| {
            let c = p.chi(u, v);
            let n = [
                p.chi(u + h, v),
                p.chi(u - h, v),
                p.chi(u, v + h),
                p.chi(u, v - h),
            ];
            (0..3)
                .map(|i| ((n[0][i] + n[1][i] + n[2][i] + n[3][i] - 4.0 * c[i]) / (h * h)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let mut curv_err = 0.0f64;
    let mut max_k = f64::NEG_INFINITY;
    for &(u, _) in &pts {
        for v in [-3.0, -1.2, 0.0, 0.7, 2.9] {
            let s = andrade_curvature(&p, u, v, 1e-3);
            curv_err = curv_err.max((s.finite_difference / s.exact - 1.0).abs());
            max_k = max_k.max(s.finite_difference);
        }
    }
    Ok((
        conf <= 1e-10 && harm <= 1e-4 && curv_err <= 1e-6 && max_k < 0.0,
        format!("conformality {conf:.2e}, harmonicity {harm:.2e}, curvature v-invariance {curv_err:.2e}, max K {max_k:.3e}"),
    ))
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ODE oracle", ode_oracle),
        ("flat-disk eigenvalue", disk_eigenvalue),
        ("Barta equality", barta_equality),
        ("subharmonic flat case", subharmonic_flat),
        ("sup-bound scaling", sup_bound_scaling),
        ("Hausdorff verdicts", hausdorff_verdicts),
        ("ball property", ball_property),
        ("Persson contrast", persson_contrast),
        ("witness trend", witness_trend),
        ("Andrade consistency", andrade_consistency),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {:<22} {}  {detail}  [{:.1} s]",
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
