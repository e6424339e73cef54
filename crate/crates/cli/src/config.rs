//! Run configuration: a JSON document whose fields can be overridden by
//! flags, resolved into a typed plan before anything is computed.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A configuration problem tied to a field (or to a place in the file).
#[derive(Debug)]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl InputError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        InputError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for InputError {}

pub type Input<T> = std::result::Result<T, InputError>;

macro_rules! run_config {
    ($($(#[$doc:meta])* $field:ident $(as $long:literal)?),* $(,)?) => {
        /// Raw configuration. Numeric fields accept JSON numbers or strings
        /// such as `1/256`, `2^-4`, `2^-4..2^-10` or `0.5,0.25`.
        #[derive(Clone, Debug, Default, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct RunConfig {
            pub subcommand: Option<String>,
            $(
                $(#[$doc])*
                $(#[serde(rename = $long)])?
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<Value>,
            )*
        }

        /// Flags shared by every subcommand; each overrides the config field
        /// of the same name.
        #[derive(Clone, Debug, Default, Args)]
        pub struct Flags {
            /// JSON configuration file.
            #[arg(long)]
            pub config: Option<PathBuf>,
            /// Validate the configuration and print the resolved plan.
            #[arg(long)]
            pub dry_run: bool,
            $(
                $(#[$doc])*
                #[arg(long $(= $long)?, allow_hyphen_values = true)]
                pub $field: Option<String>,
            )*
        }

        impl RunConfig {
            /// Applies flag overrides.
            pub fn merge(mut self, flags: &Flags) -> Self {
                $(
                    if let Some(s) = &flags.$field {
                        self.$field = Some(Value::String(s.clone()));
                    }
                )*
                self
            }
        }
    };
}

run_config! {
    /// Patch: flat-disk, rectangle, hyperbolic-disk, andrade, labyrinth, annulus.
    patch,
    /// Disk radius (flat disk, outer annulus radius).
    radius as "R",
    /// Truncation of the hyperbolic disk.
    eps,
    /// Andrade parameter r1.
    r1,
    /// Andrade parameter r2.
    r2,
    /// Andrade half-width in u.
    u_half_width,
    /// Andrade extent in v.
    v_extent,
    /// Rectangle range in u, as `u0,u1`.
    u_range,
    /// Rectangle range in v, as `v0,v1`.
    v_range,
    /// Inner radius of the annulus patch.
    inner,
    /// Labyrinth annulus index.
    n,
    /// Labyrinth surrogate slope, as `re,im`.
    slope,
    /// Grid spacing.
    dx,
    /// Number of eigenpairs.
    k,
    /// Relative residual tolerance of the eigensolver.
    tol,
    /// Iteration cap of the eigensolver.
    max_iter,
    /// Curvature bound: `const:G`, `b:B`, or a table object in the config.
    curvature as "G",
    /// Model range.
    tmax,
    /// RK4 step.
    step,
    /// Barrier exponent θ.
    theta,
    /// Inner radius of the barrier.
    a,
    /// Outer radius of the barrier.
    rmax,
    /// Ambient centre `x,y,z`.
    x0,
    /// Gauge: square, square-log, power:p, or theta:t.
    gauge,
    /// Upper end of the gauge validity range.
    delta0,
    /// Set: segment, square, square-random, or csv:PATH.
    set,
    /// Number of sample points.
    points,
    /// Covering scales.
    deltas,
    /// Cover strategy: grid, greedy or both.
    strategy,
    /// Seed for random samples.
    seed,
    /// Exhaustion family: disk or strip.
    exhaust,
    /// Exhaustion levels.
    levels,
    /// Barta test function: ground, const or radial:p.
    w,
    /// Ball centres `u,v;u,v` (or `x,y,z;…` for the witness cover).
    centers,
    /// Ball radius.
    ball_radius,
    /// Inner radius fraction.
    delta,
    /// Witness scales r1.
    witness_r1,
    /// Radius of the ambient ball D.
    domain_radius,
    /// Boundary margin for limit-set sampling.
    margin,
    /// Export matrices or samples: true or false.
    export,
    /// Output directory.
    out,
}

impl RunConfig {
    /// Reads a config file, reporting parse errors with line and column.
    pub fn load(path: &Path) -> Input<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            InputError::new("config", format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            InputError::new(
                "config",
                format!(
                    "{} line {} column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ),
            )
        })
    }
}

/// Parses `1/256`, `2^-4`, `1e-3` and plain numbers.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        return Some(parse_number(a)? / parse_number(b)?);
    }
    if let Some((b, e)) = s.split_once('^') {
        return Some(parse_number(b)?.powf(parse_number(e)?));
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses `A..B[:step]`. With powers `b^x..b^y` the exponent steps; otherwise
/// the value does. The step defaults to 1 and its sign follows the range.
pub fn parse_range(s: &str) -> Option<Vec<f64>> {
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, Some(parse_number(st)?.abs())),
        None => (s, None),
    };
    let (a, b) = range.split_once("..")?;
    let step = step.unwrap_or(1.0);
    if !(step > 0.0) {
        return None;
    }
    let power = |t: &str| {
        let (base, e) = t.trim().split_once('^')?;
        Some((parse_number(base)?, parse_number(e)?))
    };
    let (base, x0, x1) = match (power(a), power(b)) {
        (Some((p, x)), Some((q, y))) if p == q => (Some(p), x, y),
        _ => (None, parse_number(a)?, parse_number(b)?),
    };
    let n = ((x1 - x0).abs() / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return None;
    }
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    Some(
        (0..=n)
            .map(|i| {
                let x = x0 + dir * step * i as f64;
                base.map_or(x, |p| p.powf(x))
            })
            .collect(),
    )
}

pub fn number(field: &str, v: &Value) -> Input<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| InputError::new(field, "not a finite number")),
        Value::String(s) => parse_number(s)
            .ok_or_else(|| InputError::new(field, format!("cannot parse `{s}` as a number"))),
        other => Err(InputError::new(
            field,
            format!("expected a number, got {other}"),
        )),
    }
}

pub fn list(field: &str, v: &Value) -> Input<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().map(|x| number(field, x)).collect(),
        Value::String(s) if s.contains("..") => parse_range(s)
            .ok_or_else(|| InputError::new(field, format!("cannot parse `{s}` as a range"))),
        Value::String(s) => s
            .split(',')
            .map(|t| number(field, &Value::String(t.to_string())))
            .collect(),
        other => Ok(vec![number(field, other)?]),
    }
}

/// `a,b;c,d` or a JSON array of arrays.
pub fn points(field: &str, v: &Value, dim: usize) -> Input<Vec<Vec<f64>>> {
    let out: Vec<Vec<f64>> = match v {
        Value::Array(items) => items.iter().map(|x| list(field, x)).collect::<Input<_>>()?,
        Value::String(s) => s
            .split(';')
            .map(|p| list(field, &Value::String(p.to_string())))
            .collect::<Input<_>>()?,
        other => {
            return Err(InputError::new(
                field,
                format!("expected points, got {other}"),
            ))
        }
    };
    if let Some(p) = out.iter().find(|p| p.len() != dim) {
        return Err(InputError::new(
            field,
            format!("point {p:?} must have {dim} coordinates"),
        ));
    }
    Ok(out)
}

pub fn text(field: &str, v: &Value) -> Input<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        other => Err(InputError::new(
            field,
            format!("expected a string, got {other}"),
        )),
    }
}

pub fn boolean(field: &str, v: &Value) -> Input<bool> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::String(s) if s == "true" => Ok(true),
        Value::String(s) if s == "false" => Ok(false),
        other => Err(InputError::new(
            field,
            format!("expected true or false, got {other}"),
        )),
    }
}

/// Typed accessors with defaults and range checks.
pub struct Resolver<'a>(pub &'a RunConfig);

macro_rules! field {
    ($cfg:expr, $name:ident) => {
        (&$cfg.0.$name, stringify!($name))
    };
}
pub(crate) use field;

impl Resolver<'_> {
    pub fn num(&self, (v, name): (&Option<Value>, &str), default: Option<f64>) -> Input<f64> {
        match v {
            Some(v) => number(name, v),
            None => default.ok_or_else(|| InputError::new(name, "is required")),
        }
    }

    pub fn positive(&self, f: (&Option<Value>, &str), default: Option<f64>) -> Input<f64> {
        let x = self.num(f, default)?;
        if !(x > 0.0) {
            return Err(InputError::new(f.1, format!("must be positive, got {x}")));
        }
        Ok(x)
    }

    pub fn count(&self, f: (&Option<Value>, &str), default: usize) -> Input<usize> {
        let x = self.num(f, Some(default as f64))?;
        if !(x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64) {
            return Err(InputError::new(
                f.1,
                format!("must be a non-negative integer, got {x}"),
            ));
        }
        Ok(x as usize)
    }

    pub fn list(
        &self,
        (v, name): (&Option<Value>, &str),
        default: Option<Vec<f64>>,
    ) -> Input<Vec<f64>> {
        match v {
            Some(v) => list(name, v),
            None => default.ok_or_else(|| InputError::new(name, "is required")),
        }
    }

    pub fn text(&self, (v, name): (&Option<Value>, &str), default: Option<&str>) -> Input<String> {
        match v {
            Some(v) => text(name, v),
            None => default
                .map(str::to_string)
                .ok_or_else(|| InputError::new(name, "is required")),
        }
    }

    pub fn boolean(&self, (v, name): (&Option<Value>, &str), default: bool) -> Input<bool> {
        v.as_ref().map_or(Ok(default), |v| boolean(name, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/256"), Some(1.0 / 256.0));
        assert_eq!(parse_number("2^-4"), Some(0.0625));
        assert_eq!(parse_number("-1.5e-3"), Some(-1.5e-3));
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn ranges() {
        let d = parse_range("2^-4..2^-10").unwrap();
        assert_eq!(d.len(), 7);
        assert_eq!(d[0], 0.0625);
        assert_eq!(d[6], 2f64.powi(-10));
        assert_eq!(
            parse_range("1..6").unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        );
        assert_eq!(parse_range("2^-3..2^-4:0.5").unwrap().len(), 3);
        assert!(parse_range("1..2:0").is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = serde_json::from_str::<RunConfig>(r#"{"dx": 0.1, "bogus": 1}"#).unwrap_err();
        assert!(e.to_string().contains("bogus"));
        let c: RunConfig =
            serde_json::from_str(r#"{"dx": "1/64", "G": "const:1", "R": 2}"#).unwrap();
        assert!(c.curvature.is_some() && c.radius.is_some());
    }
}
