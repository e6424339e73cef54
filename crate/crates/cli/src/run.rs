//! Executes a resolved plan and writes its artifacts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use speclab::comparison::{convexity_data, mu, solve_h};
use speclab::hausdorff::{dimension_fit, doubling_constant, measure_limit, Strategy};
use speclab::spectrum::{
    ball_property_check, barta_bound, barta_witness, discretize, persson_sweep_on, smallest_eigs,
    ConvexDomain, CoverBall, Grid, WitnessBarriers,
};
use speclab::subharmonic::{
    build_barrier, default_gauge_s, sup_bound_certificate, verify_subharmonic,
    verify_subharmonic_analytic,
};
use speclab::surfaces::{limit_set_sample, write_points_csv};

use crate::plan::{Exhaust, Plan, TestFunction};
use crate::plot::{line_plot, Axes, Series};

/// How a run failed; selects the exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl From<speclab::Error> for Failure {
    fn from(e: speclab::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Files written by a run, relative to the output directory.
pub struct Output {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let p = self.path(name);
        speclab::io::write_json(value, &p)?;
        Ok(())
    }

    fn svg(&mut self, name: &str, axes: &Axes, series: &[Series]) -> Result<(), Failure> {
        let p = self.path(name);
        std::fs::write(p, line_plot(axes, series))?;
        Ok(())
    }
}

fn index_axis(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64).collect()
}

/// Runs the plan; returns lines for the terminal.
pub fn execute(plan: &Plan, out: &mut Output) -> Result<Vec<String>, Failure> {
    let mut lines = Vec::new();
    match plan {
        Plan::Model {
            curvature,
            tmax,
            step,
        } => {
            let model = solve_h(curvature.bound()?, *tmax, *step)?;
            let (hp, hpp) = (out.path("h.csv"), out.path("h_prime.csv"));
            model.write_csv(&hp, &hpp)?;
            let mu_end = mu(&model, *tmax).ok();
            out.json(
                "model.json",
                &json!({
                    "plan": plan,
                    "nodes": model.times.len(),
                    "b": model.b(),
                    "satisfies_h2": model.satisfies_h2(),
                    "h2_failure": model.h2_failure,
                    "h_nondecreasing": model.h_nondecreasing,
                    "h_at_tmax": model.h_at(*tmax),
                    "mu_at_tmax": mu_end,
                }),
            )?;
            lines.push(format!("h({tmax}) = {:.10e}", model.h_at(*tmax)));
            if let Some(m) = mu_end {
                lines.push(format!("mu({tmax}) = {m:.10}"));
            }
        }
        Plan::Subharmonic {
            curvature,
            tmax,
            step,
            theta,
            a,
            rmax,
            patch,
            dx,
            x0,
        } => {
            let model = solve_h(curvature.bound()?, tmax.max(*rmax), *step)?;
            let profile = build_barrier(&model, *theta, *a, &default_gauge_s(*theta)?, *rmax)?;
            let pp = out.path("profile.csv");
            profile.write_csv(&pp)?;
            let cert = sup_bound_certificate(&profile);
            let surface = patch.build()?;
            let discrete = verify_subharmonic(&surface, *dx, *x0, &profile)?;
            let analytic = verify_subharmonic_analytic(&surface, *dx, *x0, &profile)?;
            out.json(
                "subharmonic.json",
                &json!({
                    "plan": plan,
                    "a_bar": profile.a_bar,
                    "s_hat": profile.s_hat,
                    "s_star": profile.s_star,
                    "sup_bound": profile.sup_bound,
                    "certificate": cert,
                    "discrete": discrete,
                    "analytic": analytic,
                }),
            )?;
            lines.push(format!(
                "g(R) = {:.6e} ({:?} ratio {:.4})",
                profile.sup_bound, cert.regime, cert.ratio
            ));
            lines.push(format!(
                "min slack inside {:.4e}, outside {:.4e} (discrete)",
                discrete.inside.min_slack, discrete.outside.min_slack
            ));
        }
        Plan::Surface {
            patch,
            dx,
            points,
            margin,
            seed,
        } => {
            let surface = patch.build()?;
            let gp = out.path("grid.csv");
            surface.write_grid_csv(*dx, &gp)?;
            let grid = Grid::build(&surface, *dx)?;
            let region: Vec<usize> = (0..grid.len())
                .filter(|&n| grid.in_region[n] && grid.has_full_stencil(n))
                .collect();
            let probes: Vec<(f64, f64)> = region
                .iter()
                .step_by((region.len() / 20).max(1))
                .map(|&n| grid.coords(n))
                .collect();
            let defect = if surface.has_immersion() {
                Some(surface.conformality_defect(&probes, 1e-5)?)
            } else {
                None
            };
            let mut sampled = 0;
            if *points > 0 {
                let cloud = limit_set_sample(&surface, *margin, *points, *seed)?;
                sampled = cloud.len();
                let lp = out.path("limit_points.csv");
                write_points_csv(&cloud, &lp)?;
            }
            let area = grid.area(|_| true);
            out.json(
                "surface.json",
                &json!({
                    "plan": plan,
                    "descriptor": surface.descriptor,
                    "nodes": grid.len(),
                    "region_nodes": grid.in_region.iter().filter(|r| **r).count(),
                    "area": area,
                    "diameter": surface.diameter(),
                    "conformality_defect": defect,
                    "limit_points": sampled,
                }),
            )?;
            lines.push(format!("{}: area {area:.6}", surface.descriptor));
        }
        Plan::Spectrum {
            patch,
            dx,
            eig,
            export,
        } => {
            let problem = discretize(&patch.build()?, *dx, None)?;
            let res = smallest_eigs(&problem, eig)?;
            if *export {
                let (sp, mp) = (out.path("stiffness.mtx"), out.path("mass.csv"));
                problem.export(&sp, &mp)?;
            }
            out.json(
                "spectrum.json",
                &json!({
                    "plan": plan,
                    "unknowns": problem.len(),
                    "eigenvalues": res.eigenvalues,
                    "residuals": res.residuals,
                    "iterations": res.iterations,
                }),
            )?;
            let idx = index_axis(res.eigenvalues.len());
            out.svg(
                "eigenvalues.svg",
                &Axes {
                    title: "Dirichlet eigenvalues",
                    x_label: "index",
                    y_label: "eigenvalue",
                    log_x: false,
                    log_y: false,
                },
                &[Series {
                    label: "mu_k",
                    xs: &idx,
                    ys: &res.eigenvalues,
                }],
            )?;
            for (i, v) in res.eigenvalues.iter().enumerate() {
                lines.push(format!("mu_{} = {v:.8}", i + 1));
            }
        }
        Plan::Persson {
            patch,
            dx,
            eig,
            exhaust,
            levels,
        } => {
            let grid = Arc::new(Grid::build(&patch.build()?, *dx)?);
            let edge = patch.edge().unwrap_or(0.0);
            let sets: Vec<Box<dyn Fn(f64, f64) -> bool + Sync>> = levels
                .iter()
                .map(|&l| -> Box<dyn Fn(f64, f64) -> bool + Sync> {
                    match exhaust {
                        Exhaust::Disk => {
                            Box::new(move |u: f64, v: f64| u.hypot(v) <= edge - 0.5f64.powi(l))
                        }
                        Exhaust::Strip => Box::new(move |_: f64, v: f64| v.abs() <= 2f64.powi(l)),
                    }
                })
                .collect();
            let refs: Vec<&(dyn Fn(f64, f64) -> bool + Sync)> =
                sets.iter().map(|k| k.as_ref()).collect();
            let rep = persson_sweep_on(grid, &refs, eig)?;
            out.json("persson.json", &json!({ "plan": plan, "report": rep }))?;
            let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
            out.svg(
                "persson.svg",
                &Axes {
                    title: "Fundamental tone outside K_l",
                    x_label: "level l",
                    y_label: "tone",
                    log_x: false,
                    log_y: false,
                },
                &[
                    Series {
                        label: "tone",
                        xs: &xs,
                        ys: &rep.values,
                    },
                    Series {
                        label: "running sup",
                        xs: &xs,
                        ys: &rep.running_sup,
                    },
                ],
            )?;
            lines.push(format!(
                "tones {}; sup {:.6}",
                rep.values
                    .iter()
                    .map(|v| format!("{v:.5}"))
                    .collect::<Vec<_>>()
                    .join(" "),
                rep.sup
            ));
        }
        Plan::Barta { patch, dx, eig, w } => {
            let surface = patch.build()?;
            let problem = discretize(&surface, *dx, None)?;
            let res = smallest_eigs(&problem, eig)?;
            let mu1 = res.eigenvalues[0];
            let interior: Vec<f64> = match w {
                TestFunction::Ground => res.vectors[0].clone(),
                TestFunction::Const => vec![1.0; problem.len()],
                TestFunction::Radial { p } => {
                    let edge = patch.edge().unwrap() + dx;
                    problem
                        .interior
                        .iter()
                        .map(|&n| {
                            let (u, v) = problem.grid.coords(n as usize);
                            (1.0 - (u * u + v * v) / (edge * edge)).max(0.0).powf(*p)
                        })
                        .collect()
                }
            };
            let b = barta_bound(&problem, &problem.to_grid(&interior), None)?;
            out.json(
                "barta.json",
                &json!({
                    "plan": plan,
                    "mu1": mu1,
                    "bound": b.value,
                    "relative_gap": (mu1 - b.value) / mu1,
                    "argmin": problem.grid.coords(b.argmin_node),
                    "nodes": b.nodes,
                }),
            )?;
            lines.push(format!("Barta bound {:.10} vs mu_1 {mu1:.10}", b.value));
        }
        Plan::Witness {
            patch,
            dx,
            curvature,
            step,
            theta,
            rmax,
            domain_radius,
            centers,
            r1,
        } => {
            let surface = patch.build()?;
            let model = solve_h(curvature.bound()?, rmax.max(*domain_radius), *step)?;
            let data = convexity_data(&model, *domain_radius)?;
            let domain = ConvexDomain::from_convexity(&data, &model, [0.0; 3]);
            let barriers = WitnessBarriers {
                model: &model,
                theta: *theta,
                r: *rmax,
            };
            let mut reports = Vec::with_capacity(r1.len());
            for &r in r1 {
                let cover: Vec<CoverBall> = centers
                    .iter()
                    .map(|&c| CoverBall {
                        center: c,
                        radius: r,
                    })
                    .collect();
                let rep = barta_witness(&surface, *dx, &domain, &cover, r, &barriers)?;
                lines.push(format!("r1 = {r}: inf(-Lw)/w = {:.6}", rep.measured_bound));
                reports.push(rep);
            }
            let bounds: Vec<f64> = reports.iter().map(|r| r.measured_bound).collect();
            let ratios: Vec<f64> = bounds.windows(2).map(|w| w[1] / w[0]).collect();
            out.json(
                "witness.json",
                &json!({ "plan": plan, "reports": reports, "ratios": ratios }),
            )?;
            out.svg(
                "witness.svg",
                &Axes {
                    title: "Witness Barta bound",
                    x_label: "r1",
                    y_label: "inf(-Lw)/w",
                    log_x: true,
                    log_y: false,
                },
                &[Series {
                    label: "bound",
                    xs: r1,
                    ys: &bounds,
                }],
            )?;
        }
        Plan::Ballprop {
            patch,
            dx,
            centers,
            ball_radius,
            delta,
        } => {
            let grid = Grid::build(&patch.build()?, *dx)?;
            let rep = ball_property_check(&grid, centers, *ball_radius, *delta)?;
            let lambda = 1.1 * rep.bound;
            let forms = rep.i_lambda(lambda);
            let negative = forms.iter().all(|i| *i < 0.0);
            out.json(
                "ballprop.json",
                &json!({ "plan": plan, "report": rep, "lambda": lambda, "i_lambda": forms, "all_negative": negative }),
            )?;
            lines.push(format!(
                "C = {:.6}, bound {:.6}, I_lambda < 0 at 1.1 bound: {negative}",
                rep.c, rep.bound
            ));
        }
        Plan::Hausdorff {
            set,
            gauge,
            deltas,
            strategies,
        } => {
            let cloud = set.cloud().map_err(Failure::Input)?;
            let g = gauge.build()?;
            let doubling = doubling_constant(&g, g.delta0)?;
            let mut reports = Vec::new();
            for &s in strategies {
                let rep = measure_limit(&cloud, &g, deltas, s)?;
                let name = match s {
                    Strategy::Grid => "cover_grid.csv",
                    Strategy::Greedy => "cover_greedy.csv",
                };
                let cp = out.path(name);
                rep.write_csv(&cp)?;
                lines.push(format!(
                    "{s:?}: last sum {:.6e}, verdict {:?}",
                    rep.sums.last().unwrap(),
                    rep.verdict
                ));
                reports.push(rep);
            }
            let dimension = dimension_fit(&cloud, deltas)?;
            out.json(
                "hausdorff.json",
                &json!({
                    "plan": plan,
                    "gauge": g.label(),
                    "doubling_constant": doubling,
                    "points": cloud.len(),
                    "verdict": reports[0].verdict,
                    "reports": reports,
                    "dimension": dimension,
                }),
            )?;
            let labels: Vec<String> = reports
                .iter()
                .map(|r| format!("{:?}", r.strategy).to_lowercase())
                .collect();
            let series: Vec<Series> = reports
                .iter()
                .zip(&labels)
                .map(|(r, l)| Series {
                    label: l,
                    xs: &r.deltas,
                    ys: &r.sums,
                })
                .collect();
            out.svg(
                "cover.svg",
                &Axes {
                    title: "Covering sums",
                    x_label: "delta",
                    y_label: "sum",
                    log_x: true,
                    log_y: true,
                },
                &series,
            )?;
        }
    }
    Ok(lines)
}

/// Lower-case hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `manifest.json` content: each produced file with its digest.
pub fn manifest(
    subcommand: &str,
    config_hash: &str,
    out: &Output,
) -> Result<serde_json::Value, Failure> {
    let mut files = Vec::with_capacity(out.files.len());
    for name in &out.files {
        let bytes = std::fs::read(Path::new(&out.dir).join(name))?;
        files.push(json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(&bytes) }));
    }
    Ok(
        json!({ "subcommand": subcommand, "config_hash": config_hash, "files": files, "metadata": "metadata.json" }),
    )
}
