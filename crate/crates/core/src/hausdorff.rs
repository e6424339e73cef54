//! Gauge functions and covering estimates of generalized Hausdorff measures.
//!
//! Sets are represented by finite point clouds. Each estimator returns an
//! upper estimate of `H_{Ψ,δ}` from an explicit cover; positivity verdicts
//! are backed by an isodiametric lower bound.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Point3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeKind {
    /// `t²`
    Square,
    /// `t² |log t|`
    SquareLog,
    /// `t^p`
    Power {
        exponent: f64,
    },
    Custom,
}

/// A gauge `Ψ` valid on `[0, 2δ₀)`.
#[derive(Clone)]
pub struct Gauge {
    pub kind: GaugeKind,
    pub delta0: f64,
    custom: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gauge")
            .field("kind", &self.kind)
            .field("delta0", &self.delta0)
            .finish()
    }
}

/// Default validity radius.
pub const DEFAULT_DELTA0: f64 = 0.25;

impl Gauge {
    fn checked(kind: GaugeKind, delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0) {
            return Err(invalid(format!(
                "validity radius must be positive, got {delta0}"
            )));
        }
        if kind == GaugeKind::SquareLog && delta0 >= 0.5 {
            return Err(invalid(format!(
                "t^2|log t| needs delta0 < 1/2, got {delta0}"
            )));
        }
        Ok(Gauge {
            kind,
            delta0,
            custom: None,
        })
    }

    pub fn square(delta0: f64) -> Result<Self> {
        Self::checked(GaugeKind::Square, delta0)
    }

    pub fn square_log(delta0: f64) -> Result<Self> {
        Self::checked(GaugeKind::SquareLog, delta0)
    }

    pub fn power(exponent: f64, delta0: f64) -> Result<Self> {
        if !(exponent > 0.0) {
            return Err(invalid(format!(
                "gauge exponent must be positive, got {exponent}"
            )));
        }
        Self::checked(GaugeKind::Power { exponent }, delta0)
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, delta0: f64) -> Result<Self> {
        let mut g = Self::checked(GaugeKind::Custom, delta0)?;
        g.custom = Some(Arc::new(f));
        Ok(g)
    }

    /// The gauge matched to the barrier exponent `θ`: `t²` for `θ > 1`,
    /// `t²|log t|` for `θ = 1`, `t^{θ+1}` for `θ ∈ (0, 1)`.
    pub fn for_theta(theta: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(invalid(format!("theta must be positive, got {theta}")));
        }
        if (theta - 1.0).abs() <= crate::subharmonic::THETA_ONE_TOL {
            Self::square_log(DEFAULT_DELTA0)
        } else if theta > 1.0 {
            Self::square(DEFAULT_DELTA0)
        } else {
            Self::power(theta + 1.0, DEFAULT_DELTA0)
        }
    }

    fn raw(&self, t: f64) -> f64 {
        match &self.kind {
            GaugeKind::Square => t * t,
            GaugeKind::SquareLog => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t * t.ln().abs()
                }
            }
            GaugeKind::Power { exponent } => t.powf(*exponent),
            GaugeKind::Custom => (self.custom.as_ref().unwrap())(t),
        }
    }

    /// `Ψ(t)` for `t ∈ [0, 2δ₀)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let limit = 2.0 * self.delta0;
        if !(t >= 0.0 && t < limit) {
            return Err(Error::OutsideValidity { t, limit });
        }
        Ok(self.raw(t))
    }

    pub fn label(&self) -> String {
        match &self.kind {
            GaugeKind::Square => "t^2".into(),
            GaugeKind::SquareLog => "t^2|log t|".into(),
            GaugeKind::Power { exponent } => format!("t^{exponent}"),
            GaugeKind::Custom => "custom".into(),
        }
    }
}

/// Smallest `t` sampled by [`doubling_constant`].
pub const DOUBLING_T_MIN: f64 = 1e-300;

/// `sup Ψ(2t)/Ψ(t)` over a log-spaced sample of `(DOUBLING_T_MIN, δ₀)`,
/// skipping samples where `Ψ(t)` is subnormal.
pub fn doubling_constant(g: &Gauge, delta0: f64) -> Result<f64> {
    if !(delta0 > 0.0 && delta0 <= g.delta0) {
        return Err(Error::OutsideValidity {
            t: delta0,
            limit: g.delta0,
        });
    }
    let n = 20_000;
    let (lo, hi) = (DOUBLING_T_MIN.ln(), delta0.ln());
    let mut c = 0.0f64;
    for k in 0..n {
        // open at δ₀
        let t = (lo + (hi - lo) * k as f64 / n as f64).exp();
        let a = g.eval(t)?;
        if a >= f64::MIN_POSITIVE {
            c = c.max(g.eval(2.0 * t)? / a);
        }
    }
    Ok(c)
}

/// Finite sample of a set in `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub dim: usize,
    data: Vec<f64>,
    /// The cloud is the set itself rather than a sample of a continuum.
    pub exact: bool,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(invalid("coordinate buffer does not match the dimension"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("point cloud has non-finite coordinates"));
        }
        Ok(PointCloud {
            dim,
            data,
            exact: false,
        })
    }

    pub fn exact(mut self) -> Self {
        self.exact = true;
        self
    }

    pub fn from_points3(points: &[Point3]) -> Self {
        PointCloud {
            dim: 3,
            data: points.iter().flat_map(|p| p.iter().cloned()).collect(),
            exact: false,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Multiplies every coordinate by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        PointCloud {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
            exact: self.exact,
        }
    }

    /// `n` evenly spaced points on the unit segment `[0,1] × {0}`.
    pub fn segment(n: usize) -> Self {
        let n = n.max(2);
        let data = (0..n)
            .flat_map(|k| [k as f64 / (n - 1) as f64, 0.0])
            .collect();
        PointCloud {
            dim: 2,
            data,
            exact: false,
        }
    }

    /// `m × m` lattice on the unit square.
    pub fn square_lattice(m: usize) -> Self {
        let m = m.max(2);
        let s = 1.0 / (m - 1) as f64;
        let data = (0..m * m)
            .flat_map(|k| [(k % m) as f64 * s, (k / m) as f64 * s])
            .collect();
        PointCloud {
            dim: 2,
            data,
            exact: false,
        }
    }

    /// `n` uniform random points in the unit square.
    pub fn square_random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..2 * n).map(|_| rng.random::<f64>()).collect();
        PointCloud {
            dim: 2,
            data,
            exact: false,
        }
    }

    fn cell(&self, i: usize, side: f64) -> Vec<i64> {
        self.point(i)
            .iter()
            .map(|x| (x / side).floor() as i64)
            .collect()
    }

    /// Occupied boxes of side `side`, with their point counts.
    pub fn occupancy(&self, side: f64) -> BTreeMap<Vec<i64>, usize> {
        let mut m = BTreeMap::new();
        for i in 0..self.len() {
            *m.entry(self.cell(i, side)).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Axis boxes of side `δ/√n`, replaced by their circumscribed balls.
    Grid,
    /// Balls of radius `δ/2` about a `δ/2`-separated net.
    Greedy,
}

/// One realised cover.
#[derive(Clone, Debug, Serialize)]
pub struct CoverEstimate {
    pub delta: f64,
    pub strategy: Strategy,
    /// `Σ Ψ(diam Eᵢ)`.
    pub sum: f64,
    pub count: usize,
    /// `Σ Ψ(2 diam Eᵢ)`: balls of radius `diam Eᵢ` about a point of `Eᵢ`.
    pub enlarged_sum: f64,
    pub points_per_set: f64,
    /// Centres of the covering balls (all of diameter `δ`).
    #[serde(skip)]
    pub centers: Vec<Vec<f64>>,
}

/// Mean number of points per covering set required for a sampled continuum.
pub const MIN_POINTS_PER_SET: f64 = 4.0;

/// Upper estimate of `H_{Ψ,δ}` from one cover.
pub fn cover_measure(
    cloud: &PointCloud,
    gauge: &Gauge,
    delta: f64,
    strategy: Strategy,
) -> Result<CoverEstimate> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if delta >= gauge.delta0 {
        return Err(Error::OutsideValidity {
            t: delta,
            limit: gauge.delta0,
        });
    }
    if cloud.is_empty() {
        return Err(invalid("empty point cloud"));
    }
    let n = cloud.dim as f64;
    let side = delta / n.sqrt();
    let boxes = cloud.occupancy(side);
    let density = cloud.len() as f64 / boxes.len() as f64;
    if !cloud.exact && density < MIN_POINTS_PER_SET {
        return Err(Error::Undersampled {
            delta,
            points_per_set: density,
        });
    }
    let centers: Vec<Vec<f64>> = match strategy {
        Strategy::Grid => boxes
            .keys()
            .map(|k| k.iter().map(|&c| (c as f64 + 0.5) * side).collect())
            .collect(),
        Strategy::Greedy => greedy_net(cloud, 0.5 * delta),
    };
    let psi = gauge.eval(delta)?;
    let psi2 = gauge.eval(2.0 * delta)?;
    let count = centers.len();
    Ok(CoverEstimate {
        delta,
        strategy,
        sum: count as f64 * psi,
        count,
        enlarged_sum: count as f64 * psi2,
        points_per_set: cloud.len() as f64 / count as f64,
        centers,
    })
}

/// Maximal `r`-separated subset, built in input order: a point becomes a
/// centre unless an existing centre lies within `r`.
fn greedy_net(cloud: &PointCloud, r: f64) -> Vec<Vec<f64>> {
    let dim = cloud.dim;
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut centers: Vec<usize> = Vec::new();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let o = (k % 3) as i64 - 1;
                    k /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let r2 = r * r;
    for i in 0..cloud.len() {
        let cell = cloud.cell(i, r);
        let p = cloud.point(i);
        let covered = offsets.iter().any(|o| {
            let key: Vec<i64> = cell.iter().zip(o).map(|(a, b)| a + b).collect();
            grid.get(&key).is_some_and(|list| {
                list.iter().any(|&c| {
                    let q = cloud.point(c);
                    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2
                })
            })
        });
        if !covered {
            grid.entry(cell).or_default().push(i);
            centers.push(i);
        }
    }
    centers
        .into_iter()
        .map(|c| cloud.point(c).to_vec())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureVerdict {
    Vanishing,
    Positive,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub strategy: Strategy,
    pub gauge: String,
    pub deltas: Vec<f64>,
    /// Sum of the cover realised at each scale.
    pub sums: Vec<f64>,
    /// `min` of the sums over all scales `≤ δ`: every such cover is
    /// admissible for `δ`, so this is the best upper estimate of `H_{Ψ,δ}`.
    pub admissible: Vec<f64>,
    pub counts: Vec<usize>,
    /// Log-log slope of the sums against `δ`.
    pub decay_rate: f64,
    /// Isodiametric lower bound `(2ⁿ/ωₙ) vol` for the gauge `tⁿ`, with the
    /// volume taken from interior cells at the finest scale.
    pub packing_lower_bound: Option<f64>,
    pub verdict: MeasureVerdict,
}

impl CoverReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["delta", "sum"])?;
        for (d, s) in self.deltas.iter().zip(&self.sums) {
            w.write_record([d.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scales needed by [`measure_limit`] and [`dimension_fit`].
pub const MIN_SCALES: usize = 5;
/// A slope of the sums against `δ` above this counts as decay.
pub const DECAY_SLOPE: f64 = 0.25;
/// Sums below this floor never support a positive verdict.
pub const POSITIVE_FLOOR: f64 = 1e-3;

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Covers the cloud at every scale of a decreasing schedule and classifies
/// the limit `δ → 0`.
///
/// Vanishing: the sums decay with log-log slope at least [`DECAY_SLOPE`]
/// and the finest admissible sum is below half the coarsest. Positive: no
/// such decay and every sum stays above [`POSITIVE_FLOOR`].
pub fn measure_limit(
    cloud: &PointCloud,
    gauge: &Gauge,
    deltas: &[f64],
    strategy: Strategy,
) -> Result<CoverReport> {
    if deltas.len() < MIN_SCALES {
        return Err(invalid(format!(
            "need at least {MIN_SCALES} scales, got {}",
            deltas.len()
        )));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("delta schedule must be strictly decreasing"));
    }
    let estimates: Vec<CoverEstimate> = deltas
        .iter()
        .map(|&d| cover_measure(cloud, gauge, d, strategy))
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = estimates.iter().map(|e| e.sum).collect();
    let counts = estimates.iter().map(|e| e.count).collect();
    let mut admissible = sums.clone();
    for k in (0..admissible.len().saturating_sub(1)).rev() {
        admissible[k] = admissible[k].min(admissible[k + 1]);
    }
    let ld: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ls: Vec<f64> = sums.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect();
    let decay_rate = slope(&ld, &ls);
    let packing_lower_bound = match gauge.kind {
        GaugeKind::Power { exponent } if (exponent - cloud.dim as f64).abs() < 1e-12 => {
            Some(exponent)
        }
        GaugeKind::Square if cloud.dim == 2 => Some(2.0),
        _ => None,
    }
    .map(|_| {
        let finest = *deltas.last().unwrap();
        let side = finest / (cloud.dim as f64).sqrt();
        // only cells whose face neighbours are all occupied, so boundary
        // cells do not inflate the volume
        let occ = cloud.occupancy(side);
        let inner = occ
            .keys()
            .filter(|k| {
                (0..k.len()).all(|i| {
                    [-1i64, 1].iter().all(|d| {
                        let mut q = (*k).clone();
                        q[i] += d;
                        occ.contains_key(&q)
                    })
                })
            })
            .count();
        let vol = inner as f64 * side.powi(cloud.dim as i32);
        2f64.powi(cloud.dim as i32) / unit_ball_volume(cloud.dim) * vol
    });
    let first = sums[0];
    let last_adm = *admissible.last().unwrap();
    let verdict = if decay_rate >= DECAY_SLOPE && last_adm < 0.5 * first {
        MeasureVerdict::Vanishing
    } else if decay_rate < DECAY_SLOPE && sums.iter().all(|&s| s >= POSITIVE_FLOOR) {
        MeasureVerdict::Positive
    } else {
        MeasureVerdict::Inconclusive
    };
    Ok(CoverReport {
        strategy,
        gauge: gauge.label(),
        deltas: deltas.to_vec(),
        sums,
        admissible,
        counts,
        decay_rate,
        packing_lower_bound,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionFit {
    /// `None` when the fit is degenerate.
    pub dimension: Option<f64>,
    pub counts: Vec<usize>,
    pub deltas: Vec<f64>,
}

/// Box-counting dimension: slope of `log N(δ)` against `log(1/δ)` for boxes
/// of side `δ`.
pub fn dimension_fit(cloud: &PointCloud, deltas: &[f64]) -> Result<DimensionFit> {
    if deltas.len() < MIN_SCALES {
        return Err(invalid(format!(
            "need at least {MIN_SCALES} scales, got {}",
            deltas.len()
        )));
    }
    if cloud.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid(
            "dimension fit needs a non-empty cloud and positive scales",
        ));
    }
    let counts: Vec<usize> = deltas.iter().map(|&d| cloud.occupancy(d).len()).collect();
    let x: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let s = slope(&x, &y);
    Ok(DimensionFit {
        dimension: s.is_finite().then_some(s),
        counts,
        deltas: deltas.to_vec(),
    })
}

/// `δ = 2^{−k}` for `k` from `k0` to `k1` in steps of `step`.
pub fn dyadic_schedule(k0: f64, k1: f64, step: f64) -> Vec<f64> {
    let n = ((k1 - k0) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| 2f64.powf(-(k0 + i as f64 * step)))
        .collect()
}
