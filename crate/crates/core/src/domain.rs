//! Band domains `{ f1(y1) < y2 < f2(y1) }` bounded by two graph curves with
//! bounded height and slope.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::kernel::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// `gamma1`, `y2 = f1(y1)`
    Lower,
    /// `gamma2`, `y2 = f2(y1)`
    Upper,
}

impl CurveKind {
    pub const BOTH: [CurveKind; 2] = [CurveKind::Lower, CurveKind::Upper];
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Lower => "lower",
            CurveKind::Upper => "upper",
        })
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" | "gamma1" => Ok(CurveKind::Lower),
            "upper" | "gamma2" => Ok(CurveKind::Upper),
            _ => Err(Error::Config(format!("unknown curve `{s}` (expected lower or upper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    Flat { level: f64 },
    /// `c0 + c1 sin(c2 t + c3)`
    Sinusoid { c0: f64, c1: f64, c2: f64, c3: f64 },
    /// `base + height exp(-((t - center) / width)^2)`
    Bump { base: f64, height: f64, center: f64, width: f64 },
    /// Monotone cubic through samples, constant beyond the table.
    Table(MonotoneCubic),
}

impl CurveShape {
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            CurveShape::Flat { level } => (level, 0.0),
            CurveShape::Sinusoid { c0, c1, c2, c3 } => {
                let (s, c) = (c2 * t + c3).sin_cos();
                (c0 + c1 * s, c1 * c2 * c)
            }
            CurveShape::Bump {
                base,
                height,
                center,
                width,
            } => {
                let z = (t - center) / width;
                let g = height * (-z * z).exp();
                (base + g, -2.0 * z / width * g)
            }
            CurveShape::Table(ref table) => table.eval_with_derivative(t),
        }
    }

    /// `(inf f, sup f)` over the real line.
    fn height_range(&self) -> (f64, f64) {
        match *self {
            CurveShape::Flat { level } => (level, level),
            CurveShape::Sinusoid { c0, c1, .. } => (c0 - c1.abs(), c0 + c1.abs()),
            CurveShape::Bump { base, height, .. } => (base + height.min(0.0), base + height.max(0.0)),
            CurveShape::Table(ref table) => table
                .samples()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(v), hi.max(v))),
        }
    }

    fn slope_bound(&self) -> f64 {
        match *self {
            CurveShape::Flat { .. } => 0.0,
            CurveShape::Sinusoid { c1, c2, .. } => (c1 * c2).abs(),
            CurveShape::Bump { height, width, .. } => {
                height.abs() * std::f64::consts::SQRT_2 / width.abs() * (-0.5f64).exp()
            }
            CurveShape::Table(ref table) => {
                let (lo, hi) = table.range();
                let n = 4096;
                (0..=n)
                    .map(|i| table.eval_with_derivative(lo + (hi - lo) * i as f64 / n as f64).1.abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        let ok = match *self {
            CurveShape::Flat { level } => finite(&[level]),
            CurveShape::Sinusoid { c0, c1, c2, c3 } => finite(&[c0, c1, c2, c3]),
            CurveShape::Bump {
                base,
                height,
                center,
                width,
            } => finite(&[base, height, center, width]) && width != 0.0,
            CurveShape::Table(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid curve parameters: {self}")))
        }
    }
}

impl fmt::Display for CurveShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CurveShape::Flat { level } => write!(f, "flat:level={level}"),
            CurveShape::Sinusoid { c0, c1, c2, c3 } => write!(f, "sinusoid:c0={c0},c1={c1},c2={c2},c3={c3}"),
            CurveShape::Bump {
                base,
                height,
                center,
                width,
            } => write!(f, "bump:base={base},height={height},center={center},width={width}"),
            CurveShape::Table(_) => f.write_str("table"),
        }
    }
}

/// Parses `name` or `name:key=value,key=value`.
pub(crate) fn parse_family(s: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let (name, rest) = match s.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (s.trim(), ""),
    };
    let mut params = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value in `{s}`, found `{item}`")))?;
        params.push((k.trim(), v.trim()));
    }
    Ok((name, params))
}

pub(crate) struct FamilyParams<'a> {
    id: &'a str,
    params: Vec<(&'a str, &'a str)>,
}

impl<'a> FamilyParams<'a> {
    pub(crate) fn new(id: &'a str, params: Vec<(&'a str, &'a str)>) -> Self {
        Self { id, params }
    }

    pub(crate) fn get(&self, key: &str) -> Result<Option<f64>> {
        self.params
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("`{}`: bad value for {key}: {e}", self.id)))
            })
            .transpose()
    }

    pub(crate) fn require(&self, key: &str) -> Result<f64> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("`{}`: missing parameter {key}", self.id)))
    }

    pub(crate) fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.params.iter().find(|(k, _)| !known.contains(k)) {
            Some((k, _)) => Err(Error::Config(format!("`{}`: unknown parameter {k}", self.id))),
            None => Ok(()),
        }
    }
}

impl FromStr for CurveShape {
    type Err = Error;

    /// Analytic families only; tables are loaded with
    /// [`MonotoneCubic::from_csv`].
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = parse_family(s)?;
        let p = FamilyParams::new(s, params);
        let shape = match name {
            "flat" => {
                p.check_known(&["level"])?;
                CurveShape::Flat {
                    level: p.require("level")?,
                }
            }
            "sinusoid" => {
                p.check_known(&["c0", "c1", "c2", "c3"])?;
                CurveShape::Sinusoid {
                    c0: p.get("c0")?.unwrap_or(0.0),
                    c1: p.require("c1")?,
                    c2: p.get("c2")?.unwrap_or(1.0),
                    c3: p.get("c3")?.unwrap_or(0.0),
                }
            }
            "bump" => {
                p.check_known(&["base", "height", "center", "width"])?;
                CurveShape::Bump {
                    base: p.get("base")?.unwrap_or(0.0),
                    height: p.require("height")?,
                    center: p.get("center")?.unwrap_or(0.0),
                    width: p.get("width")?.unwrap_or(1.0),
                }
            }
            _ => return Err(Error::Config(format!("unknown curve family `{s}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    kind: CurveKind,
    shape: CurveShape,
    range: (f64, f64),
    sup_abs_f: f64,
    sup_abs_f_prime: f64,
}

impl BoundaryCurve {
    pub fn new(kind: CurveKind, shape: CurveShape) -> Result<Self> {
        shape.validate()?;
        let range = shape.height_range();
        Ok(Self {
            kind,
            sup_abs_f: range.0.abs().max(range.1.abs()),
            sup_abs_f_prime: shape.slope_bound(),
            range,
            shape,
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn f(&self, t: f64) -> f64 {
        self.shape.eval(t).0
    }

    pub fn f_prime(&self, t: f64) -> f64 {
        self.shape.eval(t).1
    }

    pub fn sup_abs_f(&self) -> f64 {
        self.sup_abs_f
    }

    pub fn sup_abs_f_prime(&self) -> f64 {
        self.sup_abs_f_prime
    }

    /// `(inf f, sup f)`.
    pub fn height_range(&self) -> (f64, f64) {
        self.range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Inside,
    Outside,
    NearBoundary,
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointClass::Inside => "inside",
            PointClass::Outside => "outside",
            PointClass::NearBoundary => "near_boundary",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDomain {
    gamma1: BoundaryCurve,
    gamma2: BoundaryCurve,
    h: f64,
}

/// Half-width of the sampling window used to check `f1 < f2` for analytic
/// curves.
const CHECK_HALF_WIDTH: f64 = 64.0;

impl BandDomain {
    /// Checks `f1 < f2` on a sample grid covering every table and
    /// `[-64, 64]`.
    pub fn new(gamma1: BoundaryCurve, gamma2: BoundaryCurve, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("band width h must be > 0, got {h}")));
        }
        if gamma1.kind != CurveKind::Lower || gamma2.kind != CurveKind::Upper {
            return Err(Error::Config("domain needs a lower curve and an upper curve".into()));
        }
        let (mut lo, mut hi) = (-CHECK_HALF_WIDTH, CHECK_HALF_WIDTH);
        for c in [&gamma1, &gamma2] {
            if let CurveShape::Table(t) = &c.shape {
                lo = lo.min(t.range().0 - 1.0);
                hi = hi.max(t.range().1 + 1.0);
            }
        }
        let n = ((hi - lo) * 16.0).ceil() as usize;
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let (f1, f2) = (gamma1.f(t), gamma2.f(t));
            if f1 >= f2 {
                return Err(Error::Config(format!(
                    "curves cross or touch at y1 = {t}: f1 = {f1}, f2 = {f2}"
                )));
            }
        }
        Ok(Self { gamma1, gamma2, h })
    }

    /// `0 < y2 < h`.
    pub fn straight_strip(h: f64) -> Result<Self> {
        Self::new(
            BoundaryCurve::new(CurveKind::Lower, CurveShape::Flat { level: 0.0 })?,
            BoundaryCurve::new(CurveKind::Upper, CurveShape::Flat { level: h })?,
            h,
        )
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn curve(&self, kind: CurveKind) -> &BoundaryCurve {
        match kind {
            CurveKind::Lower => &self.gamma1,
            CurveKind::Upper => &self.gamma2,
        }
    }

    /// `(inf f1, sup f2)`.
    pub fn height_range(&self) -> (f64, f64) {
        (self.gamma1.range.0, self.gamma2.range.1)
    }

    /// Whether both curves stay inside `[0, h]`.
    pub fn within_band(&self) -> bool {
        let (lo, hi) = self.height_range();
        lo >= 0.0 && hi <= self.h
    }

    pub fn boundary_point(&self, kind: CurveKind, y1: f64) -> Point2 {
        Point2::new(y1, self.curve(kind).f(y1))
    }

    /// Unit normal pointing out of the domain: `(f1', -1)/sqrt(1+f1'^2)` on
    /// the lower curve, `(-f2', 1)/sqrt(1+f2'^2)` on the upper one.
    pub fn exterior_normal(&self, kind: CurveKind, y1: f64) -> (f64, f64) {
        let fp = self.curve(kind).f_prime(y1);
        let len = fp.hypot(1.0);
        match kind {
            CurveKind::Lower => (fp / len, -1.0 / len),
            CurveKind::Upper => (-fp / len, 1.0 / len),
        }
    }

    /// `ds / dy1 = sqrt(1 + f'^2)`.
    pub fn arc_element(&self, kind: CurveKind, y1: f64) -> f64 {
        self.curve(kind).f_prime(y1).hypot(1.0)
    }

    /// Vertical distance to the nearer curve, scaled by the slope bound.
    /// Underestimates the Euclidean distance.
    pub fn boundary_distance(&self, x: &Point2) -> f64 {
        let f1 = self.gamma1.f(x.y1);
        let f2 = self.gamma2.f(x.y1);
        let slope = self.gamma1.sup_abs_f_prime.max(self.gamma2.sup_abs_f_prime);
        (x.y2 - f1).abs().min((f2 - x.y2).abs()) / slope.hypot(1.0)
    }

    pub fn classify_point(&self, x: &Point2, near_tol: f64) -> PointClass {
        if self.boundary_distance(x) <= near_tol {
            return PointClass::NearBoundary;
        }
        let inside = self.gamma1.f(x.y1) < x.y2 && x.y2 < self.gamma2.f(x.y1);
        if inside {
            PointClass::Inside
        } else {
            PointClass::Outside
        }
    }
}
