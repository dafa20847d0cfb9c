//! Adaptive quadrature for the kernel's `u`-integral and the boundary
//! integrals along the band.
//!
//! All engines share one globally adaptive 10/21-point Gauss-Kronrod core:
//! the panel with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |value|)` or the subdivision
//! budget runs out. Semi-infinite ranges are split geometrically into
//! `[0, s], [s, 2s], [2s, 4s], ...` and the split stops once two
//! consecutive segments contribute less than a quarter of the tolerance.
//! This is a logarithmic change of scale that costs a handful of segments
//! for integrands decaying like `exp(-a ch(u))`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;

/// Truncation margin `ln(100)`, absorbing the polynomial and logarithmic
/// prefactors of the tail integrand.
pub const TRUNCATION_MARGIN: f64 = 4.605_170_185_988_092;

const MAX_SEGMENTS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffPolicy {
    /// Integrate `[0, u_max]` only.
    Fixed(f64),
    /// Extend geometric segments until the integrand's contribution is
    /// negligible.
    DecayDriven,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub cutoff: CutoffPolicy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            cutoff: CutoffPolicy::DecayDriven,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!(
                "quadrature.abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!(
                "quadrature.rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config(
                "quadrature.max_subdivisions must be positive".into(),
            ));
        }
        if let CutoffPolicy::Fixed(u_max) = self.cutoff {
            if !(u_max > 0.0 && u_max.is_finite()) {
                return Err(Error::Config(format!(
                    "quadrature.cutoff fixed u_max must be positive, got {u_max}"
                )));
            }
        }
        Ok(())
    }

    /// Tolerance target for a given value.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Same budget, both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Quadrature of `|f|`, used to propagate relative errors of nested
    /// integrands.
    pub abs_value: f64,
}

impl IntegralResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
            abs_value: 0.0,
        }
    }
}

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_373,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
    /// The error sits on the roundoff floor; bisecting will not help.
    at_floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> (f64, bool) {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let mut at_floor = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err >= scaled {
            scaled = min_err;
            at_floor = true;
        }
    }
    (scaled, at_floor)
}

/// One 21-point Kronrod panel. The integrand returns `(value, err)` where
/// `err >= 0` is a pointwise error bound of a nested computation; it is
/// integrated with the Kronrod weights and added to the panel error.
fn gk21<F: FnMut(f64) -> (f64, f64)>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let (fc, ec) = f(center);
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = fc.abs() * WGK[10];
    let mut side = ec * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
        side += WGK[jtw] * (e1 + e2);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
        side += WGK[jtwm1] * (e1 + e2);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let (err, at_floor) = rescale_error((res_k - res_g) * half, res_abs, res_asc);
    let side = side * abs_half;
    Panel {
        a,
        b,
        value,
        error: err + side,
        abs_value: res_abs,
        at_floor: at_floor && side <= err,
    }
}

fn too_narrow(p: &Panel) -> bool {
    let scale = p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE);
    (p.b - p.a).abs() <= 1e3 * f64::EPSILON * scale
}

/// Globally adaptive refinement of an initial partition.
fn refine<F: FnMut(f64) -> (f64, f64)>(
    f: &mut F,
    panels: Vec<Panel>,
    cfg: &QuadratureConfig,
    mut evaluations: usize,
    tail_resolved: bool,
) -> IntegralResult {
    let mut frozen: Vec<Panel> = Vec::new();
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    for p in panels {
        if p.at_floor || too_narrow(&p) {
            frozen.push(p);
        } else {
            heap.push(p);
        }
    }

    let sums = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        heap.iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0, 0.0), |(v, e, s), p| {
                (v + p.value, e + p.error, s + p.abs_value)
            })
    };

    let (mut value, mut error, _) = sums(&heap, &frozen);
    let mut subdivisions = 0;
    let mut converged = false;
    loop {
        if error <= cfg.target(value) {
            // running sums drift; confirm before stopping
            let (v, e, _) = sums(&heap, &frozen);
            value = v;
            error = e;
            if error <= cfg.target(value) {
                converged = true;
                break;
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        for p in [left, right] {
            if p.at_floor || too_narrow(&p) {
                frozen.push(p);
            } else {
                heap.push(p);
            }
        }
    }

    let (value, error_estimate, abs_value) = sums(&heap, &frozen);
    IntegralResult {
        value,
        error_estimate,
        evaluations,
        converged: converged && tail_resolved,
        abs_value,
    }
}

pub(crate) fn integrate_points_with_error<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> IntegralResult {
    if points.len() < 2 {
        return IntegralResult::zero();
    }
    let mut panels = Vec::with_capacity(points.len() - 1);
    for w in points.windows(2) {
        if w[1] != w[0] {
            panels.push(gk21(&mut f, w[0], w[1]));
        }
    }
    let evaluations = 21 * panels.len();
    refine(&mut f, panels, cfg, evaluations, true)
}

/// Adaptive integral over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> IntegralResult {
    integrate_points_with_error(|t| (f(t), 0.0), &[a, b], cfg)
}

/// Adaptive integral over the partition given by the increasing `points`.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    cfg: &QuadratureConfig,
) -> IntegralResult {
    integrate_points_with_error(|t| (f(t), 0.0), points, cfg)
}

pub(crate) fn semi_infinite_with_error<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    scale: f64,
    cfg: &QuadratureConfig,
) -> IntegralResult {
    let scale = if scale.is_finite() && scale > 0.0 {
        scale
    } else {
        1.0
    };
    let mut panels = Vec::new();
    let mut lo = 0.0;
    let mut hi = scale;
    let mut running = 0.0;
    let mut tail_resolved = false;
    let mut quiet = 0;
    for _ in 0..MAX_SEGMENTS {
        if let CutoffPolicy::Fixed(u_max) = cfg.cutoff {
            if lo >= u_max {
                tail_resolved = true;
                break;
            }
            hi = hi.min(u_max);
        }
        let p = gk21(&mut f, lo, hi);
        running += p.value;
        let negligible = p.value.abs() + p.error < 0.25 * cfg.target(running);
        panels.push(p);
        if cfg.cutoff == CutoffPolicy::DecayDriven {
            quiet = if negligible { quiet + 1 } else { 0 };
            if quiet >= 2 {
                tail_resolved = true;
                break;
            }
        }
        lo = hi;
        hi *= 2.0;
    }
    let evaluations = 21 * panels.len();
    refine(&mut f, panels, cfg, evaluations, tail_resolved)
}

/// Integral over `[0, inf)` with unit starting scale.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> IntegralResult {
    integrate_semi_infinite_scaled(f, 1.0, cfg)
}

/// Integral over `[0, inf)`; `scale` is the width of the first segment and
/// should match the finest feature of the integrand near the origin.
pub fn integrate_semi_infinite_scaled<F: FnMut(f64) -> f64>(
    mut f: F,
    scale: f64,
    cfg: &QuadratureConfig,
) -> IntegralResult {
    semi_infinite_with_error(|t| (f(t), 0.0), scale, cfg)
}

/// Closed form of `int_0^inf u du / ((u^2 + r2)(u^2 + r1sq))`,
/// `ln(r1sq / r2) / (2 (r1sq - r2))`.
pub fn reference_inner_integral(r2: f64, r1sq: f64) -> Result<f64> {
    if !(r2 > 0.0 && r2.is_finite() && r1sq.is_finite()) {
        return Err(Error::domain(format!(
            "inner integral needs finite r2 > 0, got r2 = {r2}, r1sq = {r1sq}"
        )));
    }
    if r1sq < r2 {
        return Err(Error::domain(format!(
            "inner integral needs r1sq >= r2, got r2 = {r2}, r1sq = {r1sq}"
        )));
    }
    let s = (r1sq - r2) / r2;
    if s == 0.0 {
        return Ok(0.5 / r2);
    }
    Ok(s.ln_1p() / (2.0 * r2 * s))
}

/// Radius `Y` of the window `[-Y, Y]` outside which boundary integrals
/// against data bounded by `exp(c |y|)` contribute less than `tol`.
///
/// Solves `a1 ch(rho1 T) >= c T + ln(1/tol) + ln(100)` for the smallest
/// `T >= 0` beyond which the inequality holds, and returns `T + |x1|`.
pub fn truncation_radius(params: &KernelParams, c: f64, x1: f64, tol: f64) -> Result<f64> {
    truncation_radius_for_decay(params.a1(), params.rho1(), c, x1, tol)
}

/// [`truncation_radius`] with an explicit decay amplitude in place of
/// `a1`. Curves that leave `[0, h]` decay with a smaller amplitude
/// `a cos(rho1 max|y2 - h/2|)`.
pub fn truncation_radius_for_decay(decay: f64, rho1: f64, c: f64, x1: f64, tol: f64) -> Result<f64> {
    if !(decay > 0.0 && decay.is_finite() && rho1 > 0.0) {
        return Err(Error::Internal(format!(
            "truncation radius needs a positive decay amplitude, got {decay}"
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("growth rate must be >= 0, got {c}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    if !x1.is_finite() {
        return Err(Error::domain("x1 must be finite"));
    }
    let level = (1.0 / tol).ln() + TRUNCATION_MARGIN;
    let excess = |t: f64| decay * (rho1 * t).cosh() - c * t - level;

    // excess is convex with its minimum where decay * rho1 * sh(rho1 t) = c
    let t_min = (c / (decay * rho1)).asinh() / rho1;
    if excess(t_min) >= 0.0 {
        return Ok(x1.abs());
    }
    let mut lo = t_min;
    let mut hi = t_min.max(1.0);
    while excess(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(hi + x1.abs())
}
