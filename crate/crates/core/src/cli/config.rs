//! Run configuration: parsing, validation and documented tolerance defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cech::{parse_cover, CoverDocument};
use crate::clifford::Grid;
use crate::expr::{ChartPoint, Dimensions};
use crate::geometry::DMetric;
use crate::lagrange::Lagrangian;

/// Default tolerances by key. Every check in a report names the key it uses.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("almost_complex", 1e-10),
    ("anholonomy", 1e-6),
    ("chern_real", 1e-10),
    ("clifford", 1e-13),
    ("cocycle", 1e-9),
    ("compatibility", 1e-8),
    ("distortion", 1e-6),
    ("ellipticity", 1e-12),
    ("hermiticity", 1e-12),
    ("lichnerowicz", 1e-10),
    ("nconnection", 1e-8),
    ("spectrum", 1e-9),
    ("symmetry", 1e-12),
    ("torsion", 1e-10),
];

/// Task tags by source kind.
pub const LAGRANGIAN_TASKS: &[&str] = &["hessian", "spray", "nconnection", "almost_complex", "finsler"];
pub const METRIC_TASKS: &[&str] = &[
    "nconnection",
    "anholonomy",
    "dconnection",
    "torsion",
    "curvature",
    "distortion",
    "clifford",
    "spin",
    "dirac",
    "lichnerowicz",
    "chern",
];
pub const COVER_TASKS: &[&str] = &["cohomology", "spin_obstruction", "cocycle"];
pub const SYNTHETIC_TASKS: &[&str] = &["chern"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dims: Option<[usize; 2]>,
    source: RawSource,
    #[serde(default)]
    probes: Vec<RawProbe>,
    grid: Option<RawGrid>,
    tasks: Vec<String>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSource {
    Lagrangian {
        expr: String,
    },
    Metric {
        g: Vec<Vec<String>>,
        h: Vec<Vec<String>>,
        #[serde(default)]
        n: Vec<Vec<String>>,
    },
    Cover {
        path: Option<String>,
        inline: Option<serde_json::Value>,
    },
    Synthetic {
        rank: Option<usize>,
        #[serde(default)]
        components: BTreeMap<String, SyntheticValue>,
        monopole: Option<i64>,
    },
}

/// A synthetic curvature component: one matrix for every node, or one per node.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SyntheticValue {
    Constant(Vec<Vec<[f64; 2]>>),
    PerNode(Vec<Vec<Vec<[f64; 2]>>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    x: Vec<f64>,
    #[serde(default)]
    y: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
    origin: Option<Vec<f64>>,
}

/// Curvature given directly on a grid.
#[derive(Debug, Clone)]
pub enum Synthetic {
    /// Line bundle of degree `q` on a 2-torus.
    Monopole(i64),
    /// Components `F_{μν}` keyed by zero-based `(μ, ν)` with `μ < ν`.
    Components { rank: usize, values: BTreeMap<(usize, usize), SyntheticValue> },
}

#[derive(Debug, Clone)]
pub enum Source {
    Lagrangian(Lagrangian),
    Metric(DMetric),
    Cover(CoverDocument),
    Synthetic(Synthetic),
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::Lagrangian(_) => "lagrangian",
            Source::Metric(_) => "metric",
            Source::Cover(_) => "cover",
            Source::Synthetic(_) => "synthetic",
        }
    }

    fn allowed_tasks(&self) -> &'static [&'static str] {
        match self {
            Source::Lagrangian(_) => {
                // the Sasaki lift feeds the metric-level tasks as well
                &[
                    "hessian",
                    "spray",
                    "nconnection",
                    "almost_complex",
                    "finsler",
                    "anholonomy",
                    "dconnection",
                    "torsion",
                    "curvature",
                    "distortion",
                    "clifford",
                    "spin",
                    "dirac",
                    "lichnerowicz",
                    "chern",
                ]
            }
            Source::Metric(_) => METRIC_TASKS,
            Source::Cover(_) => COVER_TASKS,
            Source::Synthetic(_) => SYNTHETIC_TASKS,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dims: Option<Dimensions>,
    pub source: Source,
    pub probes: Vec<ChartPoint>,
    pub grid: Option<Grid>,
    pub tasks: Vec<String>,
    tolerances: BTreeMap<String, f64>,
    /// The parsed input, echoed into reports.
    pub echo: serde_json::Value,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text, path.parent())
    }

    /// Parses a config; relative cover paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let echo: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let raw: RawConfig = serde_json::from_value(echo.clone()).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let invalid = |s: String| ConfigError::Invalid(s);

        let dims = match raw.dims {
            Some([n, 0]) => Some(Dimensions::base_only(n).map_err(|e| invalid(e.to_string()))?),
            Some([n, m]) => Some(Dimensions::new(n, m).map_err(|e| invalid(e.to_string()))?),
            None => None,
        };
        let source = match raw.source {
            RawSource::Lagrangian { expr } => {
                let d = dims.ok_or_else(|| invalid("a lagrangian source needs dims".into()))?;
                if d.n != d.m {
                    return Err(invalid(format!("a lagrangian source needs n = m, got {:?}", [d.n, d.m])));
                }
                Source::Lagrangian(Lagrangian::parse(&expr, d.n).map_err(|e| invalid(format!("source.expr: {e}")))?)
            }
            RawSource::Metric { g, h, n } => {
                let d = dims.ok_or_else(|| invalid("a metric source needs dims".into()))?;
                Source::Metric(DMetric::from_strings(d, &g, &h, &n).map_err(|e| invalid(format!("source: {e}")))?)
            }
            RawSource::Cover { path, inline } => {
                let text = match (path, inline) {
                    (Some(p), None) => {
                        let full = resolve(base, &p);
                        std::fs::read_to_string(&full)
                            .map_err(|e| ConfigError::Io { path: full.display().to_string(), message: e.to_string() })?
                    }
                    (None, Some(v)) => v.to_string(),
                    _ => return Err(invalid("a cover source needs exactly one of path, inline".into())),
                };
                Source::Cover(parse_cover(&text).map_err(|e| invalid(format!("cover: {e}")))?)
            }
            RawSource::Synthetic { rank, components, monopole } => match (monopole, components.is_empty()) {
                (Some(q), true) => Source::Synthetic(Synthetic::Monopole(q)),
                (None, false) => {
                    let rank = rank.ok_or_else(|| invalid("synthetic components need a rank".into()))?;
                    let mut values = BTreeMap::new();
                    for (key, v) in components {
                        values.insert(component_key(&key).map_err(invalid)?, v);
                    }
                    Source::Synthetic(Synthetic::Components { rank, values })
                }
                _ => return Err(invalid("a synthetic source needs exactly one of monopole, components".into())),
            },
        };

        let mut probes = Vec::with_capacity(raw.probes.len());
        for (k, p) in raw.probes.into_iter().enumerate() {
            let cp = ChartPoint::new(p.x, p.y);
            if let Some(d) = dims {
                cp.check(d).map_err(|e| invalid(format!("probes[{k}]: {e}")))?;
            }
            if cp.flat().iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("probes[{k}] is not finite")));
            }
            probes.push(cp);
        }

        let grid = match raw.grid {
            Some(g) => {
                let origin = g.origin.unwrap_or_else(|| vec![0.0; g.sizes.len()]);
                Some(Grid::new(g.sizes, g.lengths, origin).map_err(|e| invalid(format!("grid: {e}")))?)
            }
            None => None,
        };

        let allowed = source.allowed_tasks();
        if raw.tasks.is_empty() {
            return Err(invalid("tasks must not be empty".into()));
        }
        for t in &raw.tasks {
            if !allowed.contains(&t.as_str()) {
                return Err(invalid(format!(
                    "task {t:?} is not available for a {} source (allowed: {})",
                    source.kind(),
                    allowed.join(", ")
                )));
            }
        }

        for (k, v) in &raw.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(d, _)| d == k) {
                return Err(invalid(format!("unknown tolerance key {k:?}")));
            }
            if !v.is_finite() || *v <= 0.0 {
                return Err(invalid(format!("tolerance {k:?} must be positive")));
            }
        }

        Ok(Self { dims, source, probes, grid, tasks: raw.tasks, tolerances: raw.tolerances, echo })
    }

    /// Configured or default tolerance for `key`, before any global scaling.
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| default_tolerance(key))
    }
}

pub fn default_tolerance(key: &str) -> f64 {
    DEFAULT_TOLERANCES
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .unwrap_or_else(|| panic!("no default tolerance for {key}"))
}

fn resolve(base: Option<&Path>, p: &str) -> PathBuf {
    let path = Path::new(p);
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path.to_path_buf(),
    }
}

/// `"1,2"` (one-based) to `(0, 1)`.
fn component_key(key: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    let parsed: Result<Vec<usize>, _> = parts.iter().map(|s| s.parse::<usize>()).collect();
    match parsed.as_deref() {
        Ok([a, b]) if *a >= 1 && a < b => Ok((a - 1, b - 1)),
        _ => Err(format!("component key {key:?} must be \"mu,nu\" with 1 <= mu < nu")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_lagrangian_config() {
        let c = RunConfig::parse(
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2+y2^2"},
                "probes":[{"x":[0.1,0.2],"y":[1,0]}],"tasks":["hessian","curvature"]}"#,
            None,
        )
        .unwrap();
        assert_eq!(c.source.kind(), "lagrangian");
        assert_eq!(c.probes.len(), 1);
        assert_eq!(c.tolerance("torsion"), 1e-10);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^^2"},"tasks":["hessian"]}"#,
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2"},"tasks":["cohomology"]}"#,
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2"},"tasks":["hessian"],"extra":1}"#,
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2"},"probes":[{"x":[1]}],"tasks":["hessian"]}"#,
            r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2"},"tasks":["hessian"],"tolerances":{"nope":1}}"#,
            r#"{"source":{"kind":"synthetic","monopole":1,"components":{"1,2":[[[0,1]]]}},"tasks":["chern"]}"#,
            r#"{"source":{"kind":"synthetic","rank":1,"components":{"2,1":[[[0,1]]]}},"tasks":["chern"]}"#,
        ];
        for text in bad {
            assert!(RunConfig::parse(text, None).is_err(), "{text}");
        }
    }
}
