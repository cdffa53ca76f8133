//! Run configuration: a JSON document whose fields command-line flags override.

use fraclap::constants::FracOrder;
use fraclap::geometry::Point;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Constants,
    Eval,
    Solve,
    Verify,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One tensor-grid axis: `count` evenly spaced values from `min` to `max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            c => (0..c).map(|i| self.min + (self.max - self.min) * i as f64 / (c - 1) as f64).collect(),
        }
    }
}

/// Built-in forcing families for `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    Constant { value: f64 },
    /// h ≡ (−Δ)^s (r² − |x|²)₊^s, whose solution is (r² − |x|²)^s.
    Dydares,
    /// amplitude·exp(−|y|²/width²)
    Gaussian { amplitude: f64, width: f64 },
    /// Σ c_k |y|^k
    Polynomial { coefficients: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
    /// Overrides every identity tolerance in `verify`.
    pub identity: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub s: Option<f64>,
    pub r: Option<f64>,
    /// (n, s) rows for `constants`, or the order grid for `verify`.
    pub orders: Option<Vec<(usize, f64)>>,
    /// Tensor grid of evaluation points, one axis per coordinate.
    pub grid: Option<Vec<Axis>>,
    /// Explicit evaluation points; take precedence over `grid`.
    pub points: Option<Vec<Vec<f64>>>,
    /// Fixed second argument of the two-point kernels in `eval`.
    pub anchor: Option<Vec<f64>>,
    /// `eval` selectors, one output column each.
    pub fields: Vec<String>,
    pub preset: Option<Preset>,
    /// Adds the residual column to `solve` (n = 1 only).
    pub residual: bool,
    /// Identity names for `verify`; all when absent.
    pub identities: Option<Vec<String>>,
    /// Interior points for `verify` as multiples of r along e₁.
    pub x_fractions: Option<Vec<f64>>,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const EVAL_FIELDS: &[&str] = &["phi", "smean", "poisson", "green_closed", "green_definition"];

/// Configuration problems; reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        self.n.unwrap_or(1)
    }

    pub fn order(&self) -> f64 {
        self.s.unwrap_or(0.5)
    }

    pub fn radius(&self) -> f64 {
        self.r.unwrap_or(1.0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let Some(command) = self.command else { return bad("no command given") };
        let (n, s, r) = (self.dim(), self.order(), self.radius());
        if command != Command::Constants || self.orders.is_none() {
            FracOrder::new(n, s).map_err(|e| ConfigError(e.to_string()))?;
        }
        if !(r > 0.0 && r.is_finite()) {
            return bad(format!("radius must be positive, got {r}"));
        }
        if let Some(orders) = &self.orders {
            for &(n, s) in orders {
                FracOrder::new(n, s).map_err(|e| ConfigError(e.to_string()))?;
            }
        }
        for t in [self.tolerances.rel, self.tolerances.abs, self.tolerances.identity].into_iter().flatten() {
            if !(t > 0.0) {
                return bad(format!("tolerances must be positive, got {t}"));
            }
        }
        if let Some(axes) = &self.grid {
            if axes.len() != n {
                return bad(format!("grid has {} axes for dimension {n}", axes.len()));
            }
            if axes.iter().any(|a| !a.min.is_finite() || !a.max.is_finite()) {
                return bad("grid bounds must be finite");
            }
        }
        for p in self.points.iter().flatten().chain(self.anchor.iter()) {
            if p.len() != n {
                return bad(format!("point {p:?} does not have dimension {n}"));
            }
        }
        if let Some(bad_field) = self.fields.iter().find(|f| !EVAL_FIELDS.contains(&f.as_str())) {
            return bad(format!("unknown field '{bad_field}', expected one of {EVAL_FIELDS:?}"));
        }
        match command {
            Command::Eval if self.fields.is_empty() => return bad("eval needs at least one field"),
            Command::Solve if self.preset.is_none() => return bad("solve needs a preset"),
            Command::Solve if self.residual && n != 1 => return bad("the residual column needs n = 1"),
            _ => {}
        }
        if let Some(Preset::Gaussian { width, .. }) = &self.preset {
            if !(*width > 0.0) {
                return bad("gaussian width must be positive");
            }
        }
        if let Some(names) = &self.identities {
            if let Some(b) = names.iter().find(|n| !fraclap::verify::IDENTITIES.contains(&n.as_str())) {
                return bad(format!("unknown identity '{b}'"));
            }
        }
        if let Some(f) = self.x_fractions.iter().flatten().find(|f| !(f.abs() < 1.0)) {
            return bad(format!("x fractions must lie in (-1, 1), got {f}"));
        }
        Ok(())
    }

    /// Evaluation points: explicit points, else the tensor grid, else nine
    /// points along e₁ from −0.8r to 0.8r.
    pub fn eval_points(&self) -> Vec<Point> {
        let n = self.dim();
        let raw: Vec<Vec<f64>> = if let Some(p) = &self.points {
            p.clone()
        } else if let Some(axes) = &self.grid {
            let mut acc = vec![Vec::new()];
            for axis in axes {
                let vals = axis.values();
                acc = acc.iter().flat_map(|pre| vals.iter().map(move |v| [pre.clone(), vec![*v]].concat())).collect();
            }
            acc
        } else {
            let r = self.radius();
            (0..9)
                .map(|i| {
                    let mut c = vec![0.0; n];
                    c[0] = r * (i as f64 - 4.0) / 5.0;
                    c
                })
                .collect()
        };
        raw.iter().map(|c| Point::new(c).expect("validated coordinates")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            command: Some(Command::Solve),
            n: Some(2),
            s: Some(0.4),
            grid: Some(vec![Axis { min: -0.5, max: 0.5, count: 3 }, Axis { min: 0.0, max: 0.0, count: 1 }]),
            preset: Some(Preset::Polynomial { coefficients: vec![1.0, 0.0, -2.0] }),
            tolerances: Tolerances { rel: Some(1e-8), ..Default::default() },
            format: Some(Format::Json),
            ..Default::default()
        };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.eval_points().len(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let base = RunConfig { command: Some(Command::Eval), fields: vec!["phi".into()], ..Default::default() };
        assert!(base.validate().is_ok());
        assert!(RunConfig { s: Some(1.5), ..base.clone() }.validate().is_err());
        assert!(RunConfig { fields: vec!["nope".into()], ..base.clone() }.validate().is_err());
        assert!(RunConfig { r: Some(-1.0), ..base.clone() }.validate().is_err());
        assert!(RunConfig::from_json("{\"command\": \"eval\", \"bogus\": 1}").is_err());
    }

    #[test]
    fn preset_tags() {
        let cfg = RunConfig::from_json(r#"{"command":"solve","preset":{"kind":"constant","value":2.5}}"#).unwrap();
        assert_eq!(cfg.preset, Some(Preset::Constant { value: 2.5 }));
    }
}
