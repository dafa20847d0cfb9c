//! JSON run configuration.
//!
//! ```json
//! {
//!   "kernel": { "rho": 1.0, "a": 3.0, "rho1": 0.5 },
//!   "domain": { "lower": "flat:level=0", "upper": "table:upper.csv" },
//!   "quadrature": { "abs_tol": 1e-14, "rel_tol": 1e-10, "max_subdivisions": 2000, "cutoff": "decay" },
//!   "near_tol": 0.01,
//!   "points": [[0.0, 1.5707963267948966]],
//!   "traces": {
//!     "lower": { "source": "strip_mode:n=1,A=1" },
//!     "upper": { "source": "table:upper_trace.csv", "growth_rate": 1.0 }
//!   },
//!   "decay": { "radii": [2, 4, 6, 8], "points_per_radius": 8 },
//!   "verify": { "seed": 1592598564 }
//! }
//! ```
//!
//! Only `kernel.rho` is required. Table paths are relative to the config
//! file. Curve tables have header `y1,f`, trace tables `y1,value`.

use std::fs::File;
use std::path::{Path, PathBuf};

use carleman_core::domain::{BandDomain, BoundaryCurve, CurveKind, CurveShape};
use carleman_core::interp::MonotoneCubic;
use carleman_core::representation::{CauchyTrace, DEFAULT_NEAR_TOL};
use carleman_core::verify::DEFAULT_SEED;
use carleman_core::{CutoffPolicy, KernelParams, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

const TABLE_PREFIX: &str = "table:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default = "default_near_tol")]
    pub near_tol: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<TracesSection>,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub rho: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    /// Defaults to `rho / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// Defaults to `flat:level=0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<String>,
    /// Defaults to `flat:level=h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    Decay,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_subdivisions")]
    pub max_subdivisions: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: Cutoff,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            abs_tol: default_abs_tol(),
            rel_tol: default_rel_tol(),
            max_subdivisions: default_max_subdivisions(),
            cutoff: default_cutoff(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracesSection {
    pub lower: TraceSpec,
    pub upper: TraceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    /// Harmonic-function id, `exp_growth:amplitude=..,c=..` or `table:<path>`.
    pub source: String,
    /// Declared `c`; required for tables, overrides the family's own rate
    /// otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_points_per_radius")]
    pub points_per_radius: usize,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self {
            radii: default_radii(),
            points_per_radius: default_points_per_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { seed: default_seed() }
    }
}

fn default_near_tol() -> f64 {
    DEFAULT_NEAR_TOL
}
fn default_a() -> f64 {
    3.0
}
fn default_abs_tol() -> f64 {
    QuadratureConfig::default().abs_tol
}
fn default_rel_tol() -> f64 {
    QuadratureConfig::default().rel_tol
}
fn default_max_subdivisions() -> usize {
    QuadratureConfig::default().max_subdivisions
}
fn default_cutoff() -> Cutoff {
    Cutoff::Decay
}
fn default_radii() -> Vec<f64> {
    vec![2.0, 4.0, 6.0, 8.0]
}
fn default_points_per_radius() -> usize {
    8
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("line {} column {}", e.line(), e.column()), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `--tol` override: sets `rel_tol`, and caps `abs_tol` at the same value.
    pub fn override_tolerance(&mut self, tol: f64) {
        self.quadrature.rel_tol = tol;
        self.quadrature.abs_tol = self.quadrature.abs_tol.min(tol);
    }
}

/// A validated configuration with its core objects built.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub params: KernelParams,
    pub domain: BandDomain,
    pub quad: QuadratureConfig,
    /// Lower and upper traces, when the config has a `traces` block.
    pub traces: Option<(CauchyTrace, CauchyTrace)>,
}

pub fn load_file(path: &Path, tol: Option<f64>) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(t) = tol {
        config.override_tolerance(t);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    build(config, &base)
}

/// Validates every field and constructs the kernel, domain, quadrature and
/// traces. Relative table paths resolve against `base`.
pub fn build(config: RunConfig, base: &Path) -> CliResult<Loaded> {
    let k = &config.kernel;
    let rho1 = k.rho1.unwrap_or(0.5 * k.rho);
    let params = KernelParams::new(k.rho, k.a, rho1).map_err(|e| CliError::config(kernel_field(k, rho1), e))?;

    let q = &config.quadrature;
    let quad = QuadratureConfig {
        abs_tol: q.abs_tol,
        rel_tol: q.rel_tol,
        max_subdivisions: q.max_subdivisions,
        cutoff: match q.cutoff {
            Cutoff::Decay => CutoffPolicy::DecayDriven,
            Cutoff::Fixed(u) => CutoffPolicy::Fixed(u),
        },
    };
    quad.validate().map_err(|e| CliError::config("quadrature", e))?;

    if !(config.near_tol > 0.0 && config.near_tol.is_finite()) {
        return Err(CliError::config("near_tol", format!("must be positive, got {}", config.near_tol)));
    }

    let h = params.h();
    let curve = |kind: CurveKind, spec: &Option<String>, field: &str| -> CliResult<BoundaryCurve> {
        let shape = match spec {
            None => CurveShape::Flat {
                level: if kind == CurveKind::Lower { 0.0 } else { h },
            },
            Some(s) => match s.strip_prefix(TABLE_PREFIX) {
                Some(p) => CurveShape::Table(read_table(&resolve(base, p), "f", field)?),
                None => s.parse().map_err(|e| CliError::config(field, e))?,
            },
        };
        BoundaryCurve::new(kind, shape).map_err(|e| CliError::config(field, e))
    };
    let lower = curve(CurveKind::Lower, &config.domain.lower, "domain.lower")?;
    let upper = curve(CurveKind::Upper, &config.domain.upper, "domain.upper")?;
    let domain = BandDomain::new(lower, upper, h).map_err(|e| CliError::config("domain", e))?;

    for (i, p) in config.points.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(CliError::config(format!("points[{i}]"), "coordinates must be finite"));
        }
    }

    let traces = match &config.traces {
        None => None,
        Some(t) => Some((
            trace(CurveKind::Lower, &t.lower, "traces.lower", base, params.rho())?,
            trace(CurveKind::Upper, &t.upper, "traces.upper", base, params.rho())?,
        )),
    };

    let d = &config.decay;
    for (i, r) in d.radii.iter().enumerate() {
        if !(*r > 0.0 && r.is_finite()) {
            return Err(CliError::config(format!("decay.radii[{i}]"), format!("must be positive, got {r}")));
        }
    }
    if d.points_per_radius == 0 {
        return Err(CliError::config("decay.points_per_radius", "must be positive"));
    }

    Ok(Loaded {
        config,
        params,
        domain,
        quad,
        traces,
    })
}

fn kernel_field(k: &KernelSection, rho1: f64) -> &'static str {
    if !(k.rho > 0.0 && k.rho.is_finite()) {
        "kernel.rho"
    } else if !(k.a > 0.0 && k.a.is_finite()) {
        "kernel.a"
    } else if !(rho1 > 0.0 && rho1 < k.rho) {
        "kernel.rho1"
    } else {
        "kernel"
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p.trim());
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_table(path: &Path, column: &str, field: &str) -> CliResult<MonotoneCubic> {
    let file = File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    MonotoneCubic::from_csv(file, column).map_err(|e| CliError::config(field, format!("{}: {e}", path.display())))
}

fn trace(kind: CurveKind, spec: &TraceSpec, field: &str, base: &Path, rho: f64) -> CliResult<CauchyTrace> {
    if let Some(c) = spec.growth_rate {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(CliError::config(format!("{field}.growth_rate"), format!("must be finite and >= 0, got {c}")));
        }
    }
    let mut t = match spec.source.strip_prefix(TABLE_PREFIX) {
        Some(p) => {
            let c = spec
                .growth_rate
                .ok_or_else(|| CliError::config(format!("{field}.growth_rate"), "required for tabulated traces"))?;
            CauchyTrace::tabulated(kind, read_table(&resolve(base, p), "value", field)?, c)
        }
        None => CauchyTrace::from_id(kind, &spec.source, rho).map_err(|e| CliError::config(format!("{field}.source"), e))?,
    };
    if let Some(c) = spec.growth_rate {
        t.growth_rate_c = c;
    }
    Ok(t)
}
