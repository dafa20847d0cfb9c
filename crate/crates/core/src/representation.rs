//! Boundary-integral reconstruction of harmonic functions in a band domain.
//!
//! For `U` harmonic in `D`, vanishing on `dD` and with Neumann data growing
//! slower than the kernel decays,
//!
//! ```text
//! U(x) = int_{gamma1} Phi(y, x) dU/dn ds + int_{gamma2} Phi(y, x) dU/dn ds,
//! ```
//!
//! reported through the per-curve integrals `I_j = -int_{gamma_j} Phi dU/dn ds`
//! as `U(x) = -(I_1 + I_2)`. Without the vanishing condition the full Green
//! identity `int_{dD} (Phi dU/dn - U dPhi/dn) ds` returns `U(x)` inside `D`
//! and `0` outside.
//!
//! Each curve integral runs over `y1 in [-Y, Y]`, `Y` from
//! [`truncation_radius_for_decay`], on panels concentrated around `y1 = x1`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analytic::{neumann_trace, HarmonicFn};
use crate::domain::{parse_family, BandDomain, CurveKind, FamilyParams, PointClass};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::kernel::{KernelParams, Point2, PreparedPair};
use crate::quadrature::{integrate_points_with_error, truncation_radius_for_decay, QuadratureConfig};

/// Default minimum distance between evaluation points and the boundary.
pub const DEFAULT_NEAR_TOL: f64 = 1e-2;

/// Half-width of the window searched when fitting the amplitude `M` of
/// `|g| <= M exp(c |y|)` for analytic data.
const AMPLITUDE_WINDOW: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceData {
    /// Neumann trace of a closed-form harmonic function.
    Analytic(HarmonicFn),
    /// `amplitude * exp(rate * |y1|)`.
    ExpGrowth { amplitude: f64, rate: f64 },
    /// Interpolated samples.
    Tabulated(MonotoneCubic),
}

/// Neumann data `dU/dn` along one boundary curve, with its declared growth
/// rate `c` in `|dU/dn| <= M exp(c |y|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyTrace {
    pub curve: CurveKind,
    pub data: TraceData,
    pub growth_rate_c: f64,
}

impl CauchyTrace {
    pub fn analytic(curve: CurveKind, fun: HarmonicFn) -> Self {
        Self {
            curve,
            growth_rate_c: fun.growth_rate(),
            data: TraceData::Analytic(fun),
        }
    }

    pub fn exp_growth(curve: CurveKind, amplitude: f64, rate: f64) -> Self {
        Self {
            curve,
            data: TraceData::ExpGrowth { amplitude, rate },
            growth_rate_c: rate.max(0.0),
        }
    }

    pub fn tabulated(curve: CurveKind, table: MonotoneCubic, growth_rate_c: f64) -> Self {
        Self {
            curve,
            data: TraceData::Tabulated(table),
            growth_rate_c,
        }
    }

    pub fn zero(curve: CurveKind) -> Self {
        Self::analytic(curve, HarmonicFn::Zero)
    }

    /// Parses `exp_growth:amplitude=..,c=..` (amplitude defaults to 1) or a
    /// harmonic-function id whose Neumann trace is taken.
    pub fn from_id(curve: CurveKind, id: &str, default_rho: f64) -> Result<Self> {
        let (name, params) = parse_family(id)?;
        if name != "exp_growth" {
            return Ok(Self::analytic(curve, HarmonicFn::parse(id, default_rho)?));
        }
        let p = FamilyParams::new(id, params);
        p.check_known(&["amplitude", "c"])?;
        let amplitude = p.get("amplitude")?.unwrap_or(1.0);
        let rate = p.require("c")?;
        if !(amplitude.is_finite() && rate.is_finite() && rate >= 0.0) {
            return Err(Error::Config(format!("`{id}`: need finite amplitude and c >= 0")));
        }
        Ok(Self::exp_growth(curve, amplitude, rate))
    }

    /// Identifier accepted by [`Self::from_id`]; `None` for tables.
    pub fn id(&self) -> Option<String> {
        match &self.data {
            TraceData::Analytic(f) => Some(f.to_string()),
            TraceData::ExpGrowth { amplitude, rate } => Some(format!("exp_growth:amplitude={amplitude},c={rate}")),
            TraceData::Tabulated(_) => None,
        }
    }

    pub fn value(&self, domain: &BandDomain, y1: f64) -> f64 {
        match &self.data {
            TraceData::Analytic(f) => neumann_trace(f, domain, self.curve, y1),
            TraceData::ExpGrowth { amplitude, rate } => amplitude * (rate * y1.abs()).exp(),
            TraceData::Tabulated(t) => t.eval(y1),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.growth_rate_c >= 0.0 && self.growth_rate_c.is_finite()) {
            return Err(Error::Config(format!(
                "trace growth rate must be finite and >= 0, got {}",
                self.growth_rate_c
            )));
        }
        Ok(())
    }

    /// Fitted `M` in `|g(y1)| <= M exp(c |y|)`, sampled around `center`
    /// (or over the table).
    fn amplitude(&self, domain: &BandDomain, center: f64) -> f64 {
        let c = self.growth_rate_c;
        let weight = |y1: f64| {
            let y = domain.boundary_point(self.curve, y1);
            self.value(domain, y1).abs() * (-c * y.norm()).exp()
        };
        match &self.data {
            TraceData::ExpGrowth { amplitude, rate } if *rate <= c => amplitude.abs(),
            TraceData::Tabulated(t) => t.samples().map(|(y1, _)| weight(y1)).fold(0.0, f64::max),
            _ => sample_window(center).map(weight).fold(0.0, f64::max),
        }
    }

    fn check_coverage(&self, y_max: f64) -> Result<()> {
        if let TraceData::Tabulated(t) = &self.data {
            if !t.covers(-y_max, y_max) {
                let (lo, hi) = t.range();
                return Err(Error::Coverage {
                    lo,
                    hi,
                    required: y_max,
                });
            }
        }
        Ok(())
    }
}

fn sample_window(center: f64) -> impl Iterator<Item = f64> {
    (-64..=64).map(move |k| center + AMPLITUDE_WINDOW * k as f64 / 64.0)
}

/// One boundary-curve integral with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub truncation_y: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionReport {
    pub x: Point2,
    /// `U(x) = -(I1 + I2)`
    pub value: f64,
    /// `-int_{gamma1} Phi dU/dn ds`
    pub i1: f64,
    /// `-int_{gamma2} Phi dU/dn ds`
    pub i2: f64,
    pub truncation_y: f64,
    pub quad_error: f64,
    pub classification: PointClass,
    /// A trace grows at `c >= rho/2`; the truncation is best effort.
    pub growth_warning: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenIdentityValue {
    pub x: Point2,
    /// `int_{dD} (Phi dU/dn - U dPhi/dn) ds`
    pub value: f64,
    pub per_curve: [f64; 2],
    pub error_estimate: f64,
    pub truncation_y: f64,
    pub classification: PointClass,
    /// The error estimate met the configured tolerance.
    pub accurate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCertificate {
    pub curve: CurveKind,
    pub declared_rate: f64,
    /// `(x1, I_j(x1, h/2))`, sorted by `x1`.
    pub samples: Vec<(f64, f64)>,
    /// Smallest rate `c` with `|I_j(x1)| <= C exp(c x1)` along the sorted
    /// samples: the largest secant slope of `ln|I_j|`, floored at zero.
    pub fitted_rate: f64,
    /// `C = max_k |I_j(x_k)| exp(-fitted_rate x_k)`.
    pub constant: f64,
}

impl GrowthCertificate {
    /// Whether the fitted rate stays within `fit_tol` of the declared one.
    pub fn holds(&self, fit_tol: f64) -> bool {
        self.fitted_rate <= self.declared_rate + fit_tol
    }
}

/// Evaluates boundary integrals of the kernel over one domain.
#[derive(Debug, Clone)]
pub struct BoundaryIntegrator<'a> {
    domain: &'a BandDomain,
    params: &'a KernelParams,
    quad: QuadratureConfig,
    near_tol: f64,
    decay: f64,
    truncation_factor: f64,
}

impl<'a> BoundaryIntegrator<'a> {
    /// Fails when the domain leaves the kernel's decay window or its width
    /// disagrees with `h = pi / rho`.
    pub fn new(domain: &'a BandDomain, params: &'a KernelParams, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        if (domain.h() - params.h()).abs() > 1e-12 * params.h() {
            return Err(Error::Config(format!(
                "domain width h = {} does not match pi / rho = {}",
                domain.h(),
                params.h()
            )));
        }
        let (lo, hi) = domain.height_range();
        if !(params.in_decay_window(lo) && params.in_decay_window(hi)) {
            let (wlo, whi) = params.decay_window();
            return Err(Error::Config(format!(
                "domain heights [{lo}, {hi}] leave the kernel's decay window ({wlo}, {whi})"
            )));
        }
        let decay = params.decay_amplitude(lo).min(params.decay_amplitude(hi));
        Ok(Self {
            domain,
            params,
            quad,
            near_tol: DEFAULT_NEAR_TOL,
            decay,
            truncation_factor: 1.0,
        })
    }

    pub fn with_near_tol(mut self, near_tol: f64) -> Self {
        self.near_tol = near_tol;
        self
    }

    /// Multiplies every truncation radius by `factor >= 1`, for checking
    /// that the truncated tails are negligible.
    pub fn with_truncation_factor(mut self, factor: f64) -> Self {
        self.truncation_factor = factor.max(1.0);
        self
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// Inner (`u`-integral) tolerances: a tenth of the outer ones.
    fn inner_quad(&self) -> QuadratureConfig {
        self.quad.scaled(0.1)
    }

    /// Truncation radius for data bounded by `amplitude * exp(c |y|)`.
    fn window(&self, x: &Point2, c: f64, amplitude: f64, arc_max: f64) -> Result<f64> {
        let scale = amplitude * (c * x.y1.abs()).exp();
        let target = 0.1 * self.quad.target(scale);
        // bound on 1 / (2 pi K(x2)) times the arc-length factor
        let prefactor = 3.0 * self.params.h() * self.params.a().exp() / (2.0 * PI) * arc_max;
        let tol = (target / (amplitude * prefactor)).min(0.5);
        Ok(self.truncation_factor * truncation_radius_for_decay(self.decay, self.params.rho1(), c, x.y1, tol)?)
    }

    fn panels(&self, x: &Point2, kind: CurveKind, y_max: f64) -> Vec<f64> {
        let curve = self.domain.curve(kind);
        let d = (x.y2 - curve.f(x.y1)).abs().max(1e-3);
        let mut pts = vec![-y_max, 0.0, y_max];
        let mut w = d.min(1.0) / 4.0;
        while w < 1.0 {
            pts.push(x.y1 - w);
            pts.push(x.y1 + w);
            w *= 2.0;
        }
        pts.push(x.y1);
        let n = y_max.ceil() as i64 + x.y1.abs().ceil() as i64;
        for j in 1..=n {
            pts.push(x.y1 - j as f64);
            pts.push(x.y1 + j as f64);
        }
        pts.retain(|p| p.abs() <= y_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * y_max.max(1.0));
        pts
    }

    fn arc_max(&self, kind: CurveKind) -> f64 {
        self.domain.curve(kind).sup_abs_f_prime().hypot(1.0)
    }

    /// `I_j = -int_{gamma_j} Phi(y, x) g(y) ds` for the trace's curve.
    pub fn single_layer(&self, x: &Point2, trace: &CauchyTrace) -> Result<CurveIntegral> {
        trace.validate()?;
        let kind = trace.curve;
        let amplitude = trace.amplitude(self.domain, x.y1);
        if amplitude == 0.0 {
            let y_max = self.window(x, trace.growth_rate_c, 1.0, self.arc_max(kind))?;
            return Ok(CurveIntegral {
                value: 0.0,
                error_estimate: 0.0,
                truncation_y: y_max,
                evaluations: 0,
                converged: true,
            });
        }
        let y_max = self.window(x, trace.growth_rate_c, amplitude, self.arc_max(kind))?;
        trace.check_coverage(y_max)?;

        let inner = self.inner_quad();
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let mut evaluations = 0;
        let res = integrate_points_with_error(
            |y1| {
                let y = self.domain.boundary_point(kind, y1);
                let pair = match PreparedPair::new(&y, x, self.params) {
                    Ok(p) => p,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        return (0.0, 0.0);
                    }
                };
                let phi = pair.phi(&inner);
                evaluations += phi.evaluations;
                let weight = trace.value(self.domain, y1) * self.domain.arc_element(kind, y1);
                (-phi.value * weight, phi.error_estimate * weight.abs())
            },
            &self.panels(x, kind, y_max),
            &self.quad,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(CurveIntegral {
            value: res.value,
            error_estimate: res.error_estimate,
            truncation_y: y_max,
            evaluations: evaluations + res.evaluations,
            converged: res.converged,
        })
    }

    fn require_inside(&self, x: &Point2) -> Result<PointClass> {
        match self.domain.classify_point(x, self.near_tol) {
            PointClass::Inside => Ok(PointClass::Inside),
            other => Err(Error::Classification {
                x1: x.y1,
                x2: x.y2,
                class: other.to_string(),
            }),
        }
    }

    /// `U(x) = -(I1 + I2)` from Neumann data on both curves. `x` must be
    /// inside `D`, farther than `near_tol` from the boundary.
    pub fn reconstruct(&self, x: &Point2, trace1: &CauchyTrace, trace2: &CauchyTrace) -> Result<ReconstructionReport> {
        if trace1.curve != CurveKind::Lower || trace2.curve != CurveKind::Upper {
            return Err(Error::Config("reconstruct expects a lower trace and an upper trace".into()));
        }
        let classification = self.require_inside(x)?;
        let i1 = self.single_layer(x, trace1)?;
        let i2 = self.single_layer(x, trace2)?;
        let half_rho = 0.5 * self.params.rho();
        Ok(ReconstructionReport {
            x: *x,
            value: -(i1.value + i2.value),
            i1: i1.value,
            i2: i2.value,
            truncation_y: i1.truncation_y.max(i2.truncation_y),
            quad_error: i1.error_estimate + i2.error_estimate,
            classification,
            growth_warning: trace1.growth_rate_c >= half_rho || trace2.growth_rate_c >= half_rho,
            converged: i1.converged && i2.converged,
        })
    }

    /// [`Self::reconstruct`] over a batch; rows fail independently and keep
    /// their input order.
    pub fn reconstruct_batch(
        &self,
        points: &[Point2],
        trace1: &CauchyTrace,
        trace2: &CauchyTrace,
    ) -> Vec<Result<ReconstructionReport>> {
        points.par_iter().map(|x| self.reconstruct(x, trace1, trace2)).collect()
    }

    /// `int_{dD} (Phi dU/dn - U dPhi/dn) ds`: `U(x)` inside, `0` outside.
    /// Near-boundary points are integrated with tenfold tighter tolerances
    /// and flagged when the estimate still misses the target.
    pub fn green_identity_value(&self, x: &Point2, fun: &HarmonicFn) -> Result<GreenIdentityValue> {
        let classification = self.domain.classify_point(x, self.near_tol);
        let quad = if classification == PointClass::NearBoundary {
            self.quad.scaled(0.1)
        } else {
            self.quad
        };
        let inner = quad.scaled(0.1);
        let c = fun.growth_rate();
        let mut per_curve = [0.0; 2];
        let mut error_estimate = 0.0;
        let mut truncation_y: f64 = 0.0;
        let mut converged = true;
        for (slot, kind) in CurveKind::BOTH.into_iter().enumerate() {
            let data = |y1: f64| {
                let y = self.domain.boundary_point(kind, y1);
                let u = fun.eval_u(&y);
                let dn = neumann_trace(fun, self.domain, kind, y1);
                (u, dn, y)
            };
            let amplitude = sample_window(x.y1)
                .map(|y1| {
                    let (u, dn, y) = data(y1);
                    (u.abs() + dn.abs()) * (-c * y.norm()).exp()
                })
                .fold(0.0, f64::max);
            if amplitude == 0.0 {
                continue;
            }
            let y_max = self.window(x, c, amplitude, self.arc_max(kind))?;
            truncation_y = truncation_y.max(y_max);
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let res = integrate_points_with_error(
                |y1| {
                    let (u, dn, y) = data(y1);
                    let pair = match PreparedPair::new(&y, x, self.params) {
                        Ok(p) => p,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            return (0.0, 0.0);
                        }
                    };
                    let n = self.domain.exterior_normal(kind, y1);
                    let ds = self.domain.arc_element(kind, y1);
                    let phi = pair.phi(&inner);
                    let (value, err) = if u == 0.0 {
                        (phi.value * dn, phi.error_estimate * dn.abs())
                    } else {
                        let grad = pair.grad_phi(&inner);
                        let dphi_dn = grad.dot(n);
                        let grad_err = grad.error_estimate[0] * n.0.abs() + grad.error_estimate[1] * n.1.abs();
                        (
                            phi.value * dn - u * dphi_dn,
                            phi.error_estimate * dn.abs() + grad_err * u.abs(),
                        )
                    };
                    (value * ds, err * ds)
                },
                &self.panels(x, kind, y_max),
                &quad,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            per_curve[slot] = res.value;
            error_estimate += res.error_estimate;
            converged &= res.converged;
        }
        let value = per_curve[0] + per_curve[1];
        Ok(GreenIdentityValue {
            x: *x,
            value,
            per_curve,
            error_estimate,
            truncation_y,
            classification,
            accurate: converged && error_estimate <= quad.target(value),
        })
    }

    /// Computes `I_j(x)` at `x = (x1, h/2)` for each sample and fits the
    /// exponential rate of growth in `x1`.
    pub fn growth_certificate(&self, trace: &CauchyTrace, x1_samples: &[f64]) -> Result<GrowthCertificate> {
        if x1_samples.len() < 4 {
            return Err(Error::Config(format!(
                "growth certificate needs at least 4 samples, got {}",
                x1_samples.len()
            )));
        }
        if trace.growth_rate_c >= 0.5 * self.params.rho() {
            return Err(Error::domain(format!(
                "growth certificate needs c < rho/2 = {}, got {}",
                0.5 * self.params.rho(),
                trace.growth_rate_c
            )));
        }
        let mut xs = x1_samples.to_vec();
        xs.sort_by(f64::total_cmp);
        let mid = 0.5 * self.params.h();
        let samples = xs
            .par_iter()
            .map(|&x1| {
                let x = Point2::new(x1, mid);
                self.require_inside(&x)?;
                Ok((x1, self.single_layer(&x, trace)?.value))
            })
            .collect::<Result<Vec<_>>>()?;
        let (fitted_rate, constant) = fit_growth_rate(&samples);
        Ok(GrowthCertificate {
            curve: trace.curve,
            declared_rate: trace.growth_rate_c,
            samples,
            fitted_rate,
            constant,
        })
    }
}

/// Largest secant slope of `ln|I|` over consecutive nonzero samples, at
/// least zero, and the matching constant.
fn fit_growth_rate(samples: &[(f64, f64)]) -> (f64, f64) {
    let nonzero: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|&(x, v)| (x, v.abs().ln()))
        .collect();
    if nonzero.is_empty() {
        return (0.0, 0.0);
    }
    let rate = nonzero
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(0.0, f64::max);
    let constant = nonzero.iter().map(|&(x, l)| (l - rate * x).exp()).fold(0.0, f64::max);
    (rate, constant)
}

/// Free-function form of [`BoundaryIntegrator::reconstruct`] with the
/// default near-boundary tolerance.
pub fn reconstruct(
    x: &Point2,
    domain: &BandDomain,
    trace1: &CauchyTrace,
    trace2: &CauchyTrace,
    params: &KernelParams,
    quad: &QuadratureConfig,
) -> Result<ReconstructionReport> {
    BoundaryIntegrator::new(domain, params, *quad)?.reconstruct(x, trace1, trace2)
}

pub fn green_identity_value(
    x: &Point2,
    domain: &BandDomain,
    fun: &HarmonicFn,
    params: &KernelParams,
    quad: &QuadratureConfig,
) -> Result<GreenIdentityValue> {
    BoundaryIntegrator::new(domain, params, *quad)?.green_identity_value(x, fun)
}

pub fn growth_certificate(
    trace: &CauchyTrace,
    domain: &BandDomain,
    params: &KernelParams,
    quad: &QuadratureConfig,
    x1_samples: &[f64],
) -> Result<GrowthCertificate> {
    BoundaryIntegrator::new(domain, params, *quad)?.growth_certificate(trace, x1_samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRatio {
    pub radius: f64,
    pub max_abs_u: f64,
    /// `max_{|x|=R} |U(x)| / exp(pi R / (2h))`
    pub ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayReport {
    pub rows: Vec<DecayRatio>,
    pub notes: Vec<String>,
}

impl DecayReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio < w[0].ratio)
    }
}

/// Groups `(x, U(x))` by radius `|x|` and reports the ratio of the largest
/// `|U|` on each circle to `exp(pi R / (2h))`, in increasing `R`.
pub fn decay_ratio_report(values: &[(Point2, f64)], params: &KernelParams) -> DecayReport {
    let mut report = DecayReport::default();
    let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    for (x, u) in values {
        if x.y1.is_finite() && x.y2.is_finite() && u.is_finite() {
            sorted.push((x.norm(), u.abs()));
        } else {
            report.notes.push(format!("skipped non-finite sample at ({}, {})", x.y1, x.y2));
        }
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rate = PI / (2.0 * params.h());
    let mut i = 0;
    while i < sorted.len() {
        let radius = sorted[i].0;
        let mut j = i;
        let mut max_abs_u: f64 = 0.0;
        while j < sorted.len() && (sorted[j].0 - radius).abs() <= 1e-9 * radius.max(1.0) {
            max_abs_u = max_abs_u.max(sorted[j].1);
            j += 1;
        }
        report.rows.push(DecayRatio {
            radius,
            max_abs_u,
            ratio: max_abs_u / (rate * radius).exp(),
            count: j - i,
        });
        i = j;
    }
    report
}

/// Points of the circle `|x| = radius` inside `D`: for `per_side` heights
/// spread over the domain's height range, both `x1 = +-sqrt(R^2 - x2^2)`.
pub fn circle_samples(domain: &BandDomain, radius: f64, per_side: usize, near_tol: f64) -> Vec<Point2> {
    let (lo, hi) = domain.height_range();
    let mut pts = Vec::new();
    for k in 0..per_side {
        let x2 = lo + (hi - lo) * (k as f64 + 0.5) / per_side as f64;
        if x2.abs() >= radius {
            continue;
        }
        let x1 = (radius * radius - x2 * x2).sqrt();
        for p in [Point2::new(-x1, x2), Point2::new(x1, x2)] {
            if domain.classify_point(&p, near_tol) == PointClass::Inside {
                pts.push(p);
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup() -> (BandDomain, KernelParams) {
        let params = KernelParams::new(1.0, 3.0, 0.5).unwrap();
        (BandDomain::straight_strip(params.h()).unwrap(), params)
    }

    #[test]
    fn zero_traces_give_zero() {
        let (d, p) = setup();
        let r = reconstruct(
            &Point2::new(0.3, 1.0),
            &d,
            &CauchyTrace::zero(CurveKind::Lower),
            &CauchyTrace::zero(CurveKind::Upper),
            &p,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.quad_error, 0.0);
    }

    #[test]
    fn strip_mode_reconstruction() {
        let (d, p) = setup();
        let m = HarmonicFn::strip_mode(1, 1.0, 0.0, 1.0);
        let quad = QuadratureConfig::new(1e-12, 1e-8);
        let t1 = CauchyTrace::analytic(CurveKind::Lower, m);
        let t2 = CauchyTrace::analytic(CurveKind::Upper, m);
        let x = Point2::new(1.0, PI / 4.0);
        let r = reconstruct(&x, &d, &t1, &t2, &p, &quad).unwrap();
        assert_relative_eq!(r.value, m.eval_u(&x), max_relative = 1e-6);
        assert!(r.growth_warning);
        assert_relative_eq!(r.value, -(r.i1 + r.i2));
    }

    #[test]
    fn rejects_points_outside_or_near_boundary() {
        let (d, p) = setup();
        let t1 = CauchyTrace::exp_growth(CurveKind::Lower, 1.0, 0.2);
        let t2 = CauchyTrace::exp_growth(CurveKind::Upper, 1.0, 0.2);
        let quad = QuadratureConfig::default();
        for x in [Point2::new(0.0, -1.0), Point2::new(0.0, 1e-4)] {
            assert!(matches!(
                reconstruct(&x, &d, &t1, &t2, &p, &quad),
                Err(Error::Classification { .. })
            ));
        }
    }

    #[test]
    fn uncovered_table_reports_required_radius() {
        let (d, p) = setup();
        let xs: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * i as f64).collect();
        let ys = vec![1.0; xs.len()];
        let t = CauchyTrace::tabulated(CurveKind::Lower, MonotoneCubic::new(xs, ys).unwrap(), 0.0);
        let err = reconstruct(&Point2::new(0.0, 1.0), &d, &t, &CauchyTrace::zero(CurveKind::Upper), &p, &QuadratureConfig::default())
            .unwrap_err();
        match err {
            Error::Coverage { lo, hi, required } => {
                assert_eq!((lo, hi), (-2.0, 2.0));
                assert!(required > 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exterior_point_on_straight_strip() {
        let (d, p) = setup();
        let f = HarmonicFn::parse("im_poly:k=1", 1.0).unwrap();
        let g = green_identity_value(&Point2::new(0.0, -1.0), &d, &f, &p, &QuadratureConfig::new(1e-12, 1e-8)).unwrap();
        assert_eq!(g.classification, PointClass::Outside);
        assert!(g.value.abs() < 1e-6, "{}", g.value);
    }

    #[test]
    fn trace_ids_round_trip() {
        let t = CauchyTrace::from_id(CurveKind::Lower, "exp_growth:c=0.3", 1.0).unwrap();
        assert_eq!(t.data, TraceData::ExpGrowth { amplitude: 1.0, rate: 0.3 });
        assert_eq!(t.growth_rate_c, 0.3);
        let again = CauchyTrace::from_id(CurveKind::Lower, &t.id().unwrap(), 1.0).unwrap();
        assert_eq!(again, t);
        let m = CauchyTrace::from_id(CurveKind::Upper, "strip_mode:n=1,A=1", 1.0).unwrap();
        assert_eq!(m.growth_rate_c, 1.0);
        assert!(CauchyTrace::from_id(CurveKind::Upper, "exp_growth:c=-1", 1.0).is_err());
        assert!(CauchyTrace::from_id(CurveKind::Upper, "exp_growth:rate=1", 1.0).is_err());
    }

    #[test]
    fn growth_fit() {
        let samples: Vec<(f64, f64)> = (0..7).map(|i| (i as f64, 2.0 * (0.3 * i as f64).exp())).collect();
        let (rate, c) = fit_growth_rate(&samples);
        assert_relative_eq!(rate, 0.3, max_relative = 1e-12);
        assert_relative_eq!(c, 2.0, max_relative = 1e-12);
        assert_eq!(fit_growth_rate(&[(0.0, 0.0), (1.0, 0.0)]), (0.0, 0.0));
        let decreasing: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        assert_eq!(fit_growth_rate(&decreasing).0, 0.0);
    }

    #[test]
    fn growth_certificate_needs_samples() {
        let (d, p) = setup();
        let t = CauchyTrace::exp_growth(CurveKind::Lower, 1.0, 0.3);
        assert!(matches!(
            growth_certificate(&t, &d, &p, &QuadratureConfig::default(), &[0.0, 1.0, 2.0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn decay_ratios() {
        let (_, p) = setup();
        let zero: Vec<(Point2, f64)> = [2.0, 4.0]
            .iter()
            .flat_map(|&r| [(Point2::new(r, 0.0), 0.0), (Point2::new(0.0, r), 0.0)])
            .collect();
        let rep = decay_ratio_report(&zero, &p);
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows.iter().all(|r| r.ratio == 0.0 && r.count == 2));

        let critical: Vec<(Point2, f64)> = [1.0, 3.0, 5.0]
            .iter()
            .map(|&r| (Point2::new(r, 0.0), (PI * r / (2.0 * p.h())).exp()))
            .collect();
        for row in decay_ratio_report(&critical, &p).rows {
            assert_relative_eq!(row.ratio, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn circle_samples_lie_on_circle_inside() {
        let (d, _) = setup();
        let pts = circle_samples(&d, 4.0, 8, 0.05);
        assert_eq!(pts.len(), 16);
        for x in &pts {
            assert_relative_eq!(x.norm(), 4.0, max_relative = 1e-14);
            assert_eq!(d.classify_point(x, 0.05), PointClass::Inside);
        }
        assert!(circle_samples(&d, 0.01, 8, 0.05).is_empty());
    }
}
