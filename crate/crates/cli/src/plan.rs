//! Typed, validated plans. Nothing here computes more than a cheap
//! construction check.

use serde::Serialize;
use serde_json::Value;

use speclab::comparison::CurvatureBound;
use speclab::hausdorff::{Gauge, PointCloud, Strategy, MIN_SCALES};
use speclab::spectrum::EigOptions;
use speclab::surfaces::{
    andrade_surface, circle_mock, flat_disk, flat_rectangle, hyperbolic_disk, labyrinth_patch,
    AndradeParams, ConformalPatch, LabyrinthParams,
};

use crate::config::{field, number, Input, InputError, Resolver, RunConfig};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatchSpec {
    FlatDisk {
        radius: f64,
    },
    Rectangle {
        u_range: [f64; 2],
        v_range: [f64; 2],
    },
    HyperbolicDisk {
        eps: f64,
    },
    Andrade {
        r1: f64,
        r2: f64,
        u_half_width: f64,
        v_extent: f64,
    },
    Labyrinth {
        n: u32,
        slope: [f64; 2],
    },
    Annulus {
        inner: f64,
        radius: f64,
    },
}

impl PatchSpec {
    fn resolve(r: &Resolver, default: &str) -> Input<Self> {
        let kind = r.text(field!(r, patch), Some(default))?;
        let pair = |f: (&Option<Value>, &str), d: [f64; 2]| -> Input<[f64; 2]> {
            let v = r.list(f, Some(d.to_vec()))?;
            <[f64; 2]>::try_from(v.as_slice())
                .map_err(|_| InputError::new(f.1, "expects two values"))
        };
        let spec = match kind.as_str() {
            "flat-disk" => PatchSpec::FlatDisk { radius: r.positive(field!(r, radius), Some(1.0))? },
            "rectangle" => PatchSpec::Rectangle {
                u_range: pair(field!(r, u_range), [0.0, 1.0])?,
                v_range: pair(field!(r, v_range), [0.0, 1.0])?,
            },
            "hyperbolic-disk" => PatchSpec::HyperbolicDisk { eps: r.positive(field!(r, eps), Some(1e-2))? },
            "andrade" => PatchSpec::Andrade {
                r1: r.positive(field!(r, r1), Some((5f64.sqrt() - 1.0) / 2.0))?,
                r2: r.positive(field!(r, r2), Some(1.0))?,
                u_half_width: r.positive(field!(r, u_half_width), Some(1.0))?,
                v_extent: r.positive(field!(r, v_extent), Some(10.0))?,
            },
            "labyrinth" => {
                let n = r.count(field!(r, n), 1)?;
                if n == 0 {
                    return Err(InputError::new("n", "annulus index starts at 1"));
                }
                PatchSpec::Labyrinth { n: n as u32, slope: pair(field!(r, slope), [0.2, 0.1])? }
            }
            "annulus" => PatchSpec::Annulus {
                inner: r.num(field!(r, inner), Some(0.5))?,
                radius: r.positive(field!(r, radius), Some(1.0))?,
            },
            other => {
                return Err(InputError::new(
                    "patch",
                    format!("unknown patch `{other}`; expected flat-disk, rectangle, hyperbolic-disk, andrade, labyrinth or annulus"),
                ))
            }
        };
        spec.build()
            .map_err(|e| InputError::new("patch", e.to_string()))?;
        Ok(spec)
    }

    pub fn build(&self) -> speclab::Result<ConformalPatch> {
        match *self {
            PatchSpec::FlatDisk { radius } => flat_disk(radius),
            PatchSpec::Rectangle { u_range, v_range } => flat_rectangle(u_range, v_range),
            PatchSpec::HyperbolicDisk { eps } => hyperbolic_disk(eps),
            PatchSpec::Andrade {
                r1,
                r2,
                u_half_width,
                v_extent,
            } => andrade_surface(AndradeParams::new(r1, r2)?, u_half_width, v_extent),
            PatchSpec::Labyrinth { n, slope } => {
                labyrinth_patch(LabyrinthParams::harmonic(n, slope))
            }
            PatchSpec::Annulus { inner, radius } => circle_mock(inner, radius),
        }
    }

    /// Outer radius for disk exhaustions.
    pub fn edge(&self) -> Option<f64> {
        match *self {
            PatchSpec::FlatDisk { radius } | PatchSpec::Annulus { radius, .. } => Some(radius),
            PatchSpec::HyperbolicDisk { eps } => Some(1.0 - eps),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurvatureSpec {
    Constant { g: f64 },
    B { b: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl CurvatureSpec {
    fn resolve(r: &Resolver, default: &str) -> Input<Self> {
        let bad = |m: String| InputError::new("G", m);
        let spec = match &r.0.curvature {
            Some(Value::Object(map)) => {
                let get = |k: &str| -> Input<Vec<f64>> {
                    let v = map
                        .get(k)
                        .ok_or_else(|| bad(format!("table needs `{k}`")))?;
                    crate::config::list("G", v)
                };
                if let Some(k) = map.keys().find(|k| *k != "times" && *k != "values") {
                    return Err(bad(format!("unknown table key `{k}`")));
                }
                CurvatureSpec::Table {
                    times: get("times")?,
                    values: get("values")?,
                }
            }
            other => {
                let s = match other {
                    Some(v) => crate::config::text("G", v)?,
                    None => default.to_string(),
                };
                let (kind, val) = s
                    .split_once(':')
                    .ok_or_else(|| bad(format!("expected const:G or b:B, got `{s}`")))?;
                let x = number("G", &Value::String(val.to_string()))?;
                match kind {
                    "const" => CurvatureSpec::Constant { g: x },
                    "b" if x >= 0.0 => CurvatureSpec::B { b: x },
                    _ => {
                        return Err(bad(format!(
                            "expected const:G or b:B with B >= 0, got `{s}`"
                        )))
                    }
                }
            }
        };
        spec.bound().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    pub fn bound(&self) -> speclab::Result<CurvatureBound> {
        Ok(match self {
            CurvatureSpec::Constant { g } => CurvatureBound::constant(*g),
            CurvatureSpec::B { b } => CurvatureBound::from_b(*b),
            CurvatureSpec::Table { times, values } => {
                CurvatureBound::tabulated(times.clone(), values.clone())?
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GaugeSpec {
    Square { delta0: f64 },
    SquareLog { delta0: f64 },
    Power { exponent: f64, delta0: f64 },
    Theta { theta: f64 },
}

impl GaugeSpec {
    fn resolve(r: &Resolver) -> Input<Self> {
        let s = r.text(field!(r, gauge), Some("square-log"))?;
        let delta0 = r.positive(field!(r, delta0), Some(speclab::hausdorff::DEFAULT_DELTA0))?;
        let spec = match s.split_once(':') {
            None if s == "square" => GaugeSpec::Square { delta0 },
            None if s == "square-log" => GaugeSpec::SquareLog { delta0 },
            Some(("power", p)) => GaugeSpec::Power {
                exponent: number("gauge", &Value::String(p.into()))?,
                delta0,
            },
            Some(("theta", t)) => GaugeSpec::Theta {
                theta: number("gauge", &Value::String(t.into()))?,
            },
            _ => {
                return Err(InputError::new(
                    "gauge",
                    format!("unknown gauge `{s}`; expected square, square-log, power:p or theta:t"),
                ))
            }
        };
        spec.build()
            .map_err(|e| InputError::new("gauge", e.to_string()))?;
        Ok(spec)
    }

    pub fn build(&self) -> speclab::Result<Gauge> {
        match *self {
            GaugeSpec::Square { delta0 } => Gauge::square(delta0),
            GaugeSpec::SquareLog { delta0 } => Gauge::square_log(delta0),
            GaugeSpec::Power { exponent, delta0 } => Gauge::power(exponent, delta0),
            GaugeSpec::Theta { theta } => Gauge::for_theta(theta),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    Segment { points: usize },
    Square { side: usize },
    SquareRandom { points: usize, seed: u64 },
    Csv { path: String },
}

impl SetSpec {
    pub fn cloud(&self) -> Result<PointCloud, String> {
        match self {
            SetSpec::Segment { points } => Ok(PointCloud::segment(*points)),
            SetSpec::Square { side } => Ok(PointCloud::square_lattice(*side)),
            SetSpec::SquareRandom { points, seed } => Ok(PointCloud::square_random(*points, *seed)),
            SetSpec::Csv { path } => read_cloud(path),
        }
    }
}

/// Numeric CSV rows; a non-numeric first line is taken as a header.
fn read_cloud(path: &str) -> Result<PointCloud, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let mut dim = 0;
    let mut data = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let row: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = match row {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(format!("{path} line {}: not numeric", i + 1)),
        };
        if dim == 0 {
            dim = row.len();
        } else if row.len() != dim {
            return Err(format!("{path} line {}: expected {dim} columns", i + 1));
        }
        data.extend(row);
    }
    if data.is_empty() {
        return Err(format!("{path} holds no points"));
    }
    PointCloud::new(dim, data).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exhaust {
    /// `|z| ≤ edge − 2^{−l}`.
    Disk,
    /// `|v| ≤ 2^l`.
    Strip,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// The computed ground state.
    Ground,
    Const,
    /// `(1 − (|z|/E)²)^p` with `E = edge + Δ`, so the profile reaches zero
    /// at the Dirichlet collar of the staircase domain.
    Radial {
        p: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Plan {
    Model {
        curvature: CurvatureSpec,
        tmax: f64,
        step: f64,
    },
    Subharmonic {
        curvature: CurvatureSpec,
        tmax: f64,
        step: f64,
        theta: f64,
        a: f64,
        rmax: f64,
        patch: PatchSpec,
        dx: f64,
        x0: [f64; 3],
    },
    Surface {
        patch: PatchSpec,
        dx: f64,
        points: usize,
        margin: f64,
        seed: u64,
    },
    Spectrum {
        patch: PatchSpec,
        dx: f64,
        eig: EigOptions,
        export: bool,
    },
    Persson {
        patch: PatchSpec,
        dx: f64,
        eig: EigOptions,
        exhaust: Exhaust,
        levels: Vec<i32>,
    },
    Barta {
        patch: PatchSpec,
        dx: f64,
        eig: EigOptions,
        w: TestFunction,
    },
    Witness {
        patch: PatchSpec,
        dx: f64,
        curvature: CurvatureSpec,
        step: f64,
        theta: f64,
        rmax: f64,
        domain_radius: f64,
        centers: Vec<[f64; 3]>,
        r1: Vec<f64>,
    },
    Ballprop {
        patch: PatchSpec,
        dx: f64,
        centers: Vec<(f64, f64)>,
        ball_radius: f64,
        delta: f64,
    },
    Hausdorff {
        set: SetSpec,
        gauge: GaugeSpec,
        deltas: Vec<f64>,
        strategies: Vec<Strategy>,
    },
}

fn eig_options(r: &Resolver, k_default: usize) -> Input<EigOptions> {
    let k = r.count(field!(r, k), k_default)?;
    if k == 0 {
        return Err(InputError::new("k", "must be at least 1"));
    }
    let max_iter = r.count(field!(r, max_iter), EigOptions::default().max_iter)?;
    if max_iter == 0 {
        return Err(InputError::new("max_iter", "must be at least 1"));
    }
    Ok(EigOptions {
        k,
        tol: r.positive(field!(r, tol), Some(1e-8))?,
        max_iter,
        seed: r.count(field!(r, seed), 0)? as u64,
        ..Default::default()
    })
}

fn unit_interval(f: (&Option<Value>, &str), r: &Resolver, default: f64) -> Input<f64> {
    let x = r.num(f, Some(default))?;
    if !(x > 0.0 && x < 1.0) {
        return Err(InputError::new(f.1, format!("must lie in (0, 1), got {x}")));
    }
    Ok(x)
}

fn vec3(p: &[f64]) -> [f64; 3] {
    [p[0], p[1], p[2]]
}

/// Resolves the merged configuration into a plan for `subcommand`.
pub fn resolve(subcommand: &str, cfg: &RunConfig) -> Input<Plan> {
    if let Some(s) = &cfg.subcommand {
        if s != subcommand {
            return Err(InputError::new(
                "subcommand",
                format!("config is for `{s}`, invoked as `{subcommand}`"),
            ));
        }
    }
    let r = Resolver(cfg);
    let dx = |default: f64| r.positive(field!(r, dx), Some(default));
    let plan = match subcommand {
        "model" => Plan::Model {
            curvature: CurvatureSpec::resolve(&r, "const:0")?,
            tmax: r.positive(field!(r, tmax), Some(5.0))?,
            step: r.positive(field!(r, step), Some(1e-3))?,
        },
        "subharmonic" => {
            let rmax = r.positive(field!(r, rmax), Some(1.0))?;
            let x0 = r.list(field!(r, x0), Some(vec![0.0; 3]))?;
            if x0.len() != 3 {
                return Err(InputError::new("x0", "expects three coordinates"));
            }
            Plan::Subharmonic {
                curvature: CurvatureSpec::resolve(&r, "b:0")?,
                tmax: r.positive(field!(r, tmax), Some(rmax))?,
                step: r.positive(field!(r, step), Some(1e-3))?,
                theta: r.positive(field!(r, theta), Some(1.0))?,
                a: r.positive(field!(r, a), Some(0.2))?,
                rmax,
                patch: PatchSpec::resolve(&r, "flat-disk")?,
                dx: dx(1.0 / 128.0)?,
                x0: vec3(&x0),
            }
        }
        "surface" => Plan::Surface {
            patch: PatchSpec::resolve(&r, "andrade")?,
            dx: dx(1.0 / 32.0)?,
            points: r.count(field!(r, points), 0)?,
            margin: r.positive(field!(r, margin), Some(0.05))?,
            seed: r.count(field!(r, seed), 0)? as u64,
        },
        "spectrum" => Plan::Spectrum {
            patch: PatchSpec::resolve(&r, "flat-disk")?,
            dx: dx(1.0 / 64.0)?,
            eig: eig_options(&r, 1)?,
            export: r.boolean(field!(r, export), false)?,
        },
        "persson" => {
            let patch = PatchSpec::resolve(&r, "hyperbolic-disk")?;
            let default = if patch.edge().is_some() {
                "disk"
            } else {
                "strip"
            };
            let exhaust = match r.text(field!(r, exhaust), Some(default))?.as_str() {
                "disk" if patch.edge().is_some() => Exhaust::Disk,
                "disk" => {
                    return Err(InputError::new(
                        "exhaust",
                        "disk exhaustion needs a disk-shaped patch",
                    ))
                }
                "strip" => Exhaust::Strip,
                other => {
                    return Err(InputError::new(
                        "exhaust",
                        format!("unknown exhaustion `{other}`; expected disk or strip"),
                    ))
                }
            };
            let levels = r.list(field!(r, levels), Some((1..=6).map(f64::from).collect()))?;
            if levels.is_empty() || levels.iter().any(|l| l.fract() != 0.0 || l.abs() > 60.0) {
                return Err(InputError::new("levels", "expects integers"));
            }
            if levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(InputError::new("levels", "must increase"));
            }
            Plan::Persson {
                patch,
                dx: dx(1.0 / 64.0)?,
                eig: EigOptions {
                    tol: 1e-6,
                    ..eig_options(&r, 1)?
                },
                exhaust,
                levels: levels.iter().map(|&l| l as i32).collect(),
            }
        }
        "barta" => {
            let patch = PatchSpec::resolve(&r, "flat-disk")?;
            let s = r.text(field!(r, w), Some("ground"))?;
            let w = match s.split_once(':') {
                None if s == "ground" => TestFunction::Ground,
                None if s == "const" => TestFunction::Const,
                Some(("radial", p)) if patch.edge().is_some() => {
                    TestFunction::Radial { p: crate::config::number("w", &Value::String(p.into()))? }
                }
                _ => return Err(InputError::new("w", format!("unknown test function `{s}`; expected ground, const or radial:p (disk patches)"))),
            };
            Plan::Barta {
                patch,
                dx: dx(1.0 / 64.0)?,
                eig: eig_options(&r, 1)?,
                w,
            }
        }
        "witness" => {
            let patch = PatchSpec::resolve(&r, "flat-disk")?;
            if !patch
                .build()
                .map_err(|e| InputError::new("patch", e.to_string()))?
                .has_immersion()
            {
                return Err(InputError::new(
                    "patch",
                    "the witness needs an immersed patch",
                ));
            }
            let domain_radius = r.positive(field!(r, domain_radius), Some(1.0))?;
            let centers = match &cfg.centers {
                Some(v) => crate::config::points("centers", v, 3)?,
                None => vec![vec![0.5, 0.0, 0.0], vec![-0.5, 0.0, 0.0]],
            };
            let r1 = r.list(field!(r, witness_r1), Some(vec![0.01]))?;
            if r1.iter().any(|x| !(*x > 0.0 && *x < 0.25)) {
                return Err(InputError::new("witness_r1", "scales must lie in (0, 1/4)"));
            }
            Plan::Witness {
                patch,
                dx: dx(1.0 / 256.0)?,
                curvature: CurvatureSpec::resolve(&r, "b:0")?,
                step: r.positive(field!(r, step), Some(1e-3))?,
                theta: r.positive(field!(r, theta), Some(1.0))?,
                rmax: r.positive(field!(r, rmax), Some(2.0 * domain_radius))?,
                domain_radius,
                centers: centers.iter().map(|p| vec3(p)).collect(),
                r1,
            }
        }
        "ballprop" => {
            let centers = match &cfg.centers {
                Some(v) => crate::config::points("centers", v, 2)?,
                None => vec![vec![0.0, 0.0]],
            };
            Plan::Ballprop {
                patch: PatchSpec::resolve(&r, "flat-disk")?,
                dx: dx(1.0 / 128.0)?,
                centers: centers.iter().map(|p| (p[0], p[1])).collect(),
                ball_radius: r.positive(field!(r, ball_radius), Some(0.5))?,
                delta: unit_interval(field!(r, delta), &r, 0.5)?,
            }
        }
        "hausdorff" => {
            let points = r.count(field!(r, points), 100_000)?;
            if points < 2 {
                return Err(InputError::new("points", "needs at least two points"));
            }
            let seed = r.count(field!(r, seed), 0)? as u64;
            let s = r.text(field!(r, set), Some("segment"))?;
            let set = match s.split_once(':') {
                None if s == "segment" => SetSpec::Segment { points },
                None if s == "square" => SetSpec::Square {
                    side: (points as f64).sqrt().round() as usize,
                },
                None if s == "square-random" => SetSpec::SquareRandom { points, seed },
                Some(("csv", p)) => SetSpec::Csv {
                    path: p.to_string(),
                },
                _ => {
                    return Err(InputError::new(
                        "set",
                        format!(
                        "unknown set `{s}`; expected segment, square, square-random or csv:PATH"
                    ),
                    ))
                }
            };
            let deltas = r.list(
                field!(r, deltas),
                Some(speclab::hausdorff::dyadic_schedule(4.0, 10.0, 1.0)),
            )?;
            if deltas.len() < MIN_SCALES || deltas.iter().any(|d| !(*d > 0.0)) {
                return Err(InputError::new(
                    "deltas",
                    format!("needs at least {MIN_SCALES} positive scales"),
                ));
            }
            let strategies = match r.text(field!(r, strategy), Some("grid"))?.as_str() {
                "grid" => vec![Strategy::Grid],
                "greedy" => vec![Strategy::Greedy],
                "both" => vec![Strategy::Grid, Strategy::Greedy],
                other => {
                    return Err(InputError::new(
                        "strategy",
                        format!("unknown strategy `{other}`; expected grid, greedy or both"),
                    ))
                }
            };
            let gauge = GaugeSpec::resolve(&r)?;
            let delta0 = gauge
                .build()
                .map_err(|e| InputError::new("gauge", e.to_string()))?
                .delta0;
            if let Some(d) = deltas.iter().find(|d| **d >= delta0) {
                return Err(InputError::new(
                    "deltas",
                    format!("scale {d} must stay below the gauge radius {delta0}"),
                ));
            }
            Plan::Hausdorff {
                set,
                gauge,
                deltas,
                strategies,
            }
        }
        other => {
            return Err(InputError::new(
                "subcommand",
                format!("unknown subcommand `{other}`"),
            ))
        }
    };
    Ok(plan)
}
