//! The Carleman-type kernel of the band `0 < y2 < h`, `h = pi / rho`.
//!
//! With
//!
//! ```text
//! K(w)  = exp(-a ch(i rho1 (w - h/2))) / (w + 3h - x2)
//!       = exp(-a cos(rho1 (w - h/2))) / (w + 3h - x2)
//! Phi(y, x) = -1 / (2 pi K(x2)) * int_0^inf Im[K(y2 + i eta) / (y2 - x2 + i eta)] u du / eta,
//! eta^2 = u^2 + (y1 - x1)^2,
//! ```
//!
//! `Phi(., x)` is harmonic away from `x`, equals `-(1/2pi) ln|y - x|` plus a
//! bounded part near `x`, and decays like `exp(-a cos(rho1 (y2 - h/2)) ch(rho1 alpha))`
//! along the band.
//!
//! The integrand is available in two algebraically equivalent forms: direct
//! complex arithmetic, and the real two-term expansion which stays regular
//! as `eta -> 0`.
//!
//! Points are admissible when their height lies in the decay window
//! `|rho1 (y2 - h/2)| < pi/2`, which contains the closed band `[0, h]`
//! because `rho1 < rho`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{semi_infinite_with_error, QuadratureConfig};

pub type ComplexValue = Complex64;

/// Below `SMALL_ETA * h` the direct integrand (a `0/0` form at `eta = 0`)
/// hands over to the expanded form.
pub const SMALL_ETA: f64 = 1e-6;

/// `exp(-x)` underflows to zero past this exponent.
const EXP_UNDERFLOW: f64 = 745.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    rho: f64,
    h: f64,
    a: f64,
    rho1: f64,
    a1: f64,
}

impl KernelParams {
    /// Validates `rho > 0`, `a > 0`, `0 < rho1 < rho` and derives
    /// `h = pi / rho`, `a1 = a cos(rho1 h / 2)`.
    pub fn new(rho: f64, a: f64, rho1: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("kernel.rho must be > 0, got {rho}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("kernel.a must be > 0, got {a}")));
        }
        if !(rho1 > 0.0 && rho1 < rho) {
            return Err(Error::Config(format!(
                "kernel.rho1 must satisfy 0 < rho1 < rho = {rho}, got {rho1}"
            )));
        }
        let h = PI / rho;
        Ok(Self {
            rho,
            h,
            a,
            rho1,
            a1: a * (0.5 * rho1 * h).cos(),
        })
    }

    /// `rho1 = rho / 2`, `a = 3`.
    pub fn with_defaults(rho: f64) -> Result<Self> {
        Self::new(rho, 3.0, 0.5 * rho)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Open interval of heights where `cos(rho1 (y2 - h/2)) > 0`.
    pub fn decay_window(&self) -> (f64, f64) {
        let half = FRAC_PI_2 / self.rho1;
        (0.5 * self.h - half, 0.5 * self.h + half)
    }

    pub fn in_decay_window(&self, y2: f64) -> bool {
        let (lo, hi) = self.decay_window();
        y2 > lo && y2 < hi
    }

    /// Decay amplitude `a cos(rho1 (y2 - h/2))` at height `y2`.
    pub fn decay_amplitude(&self, y2: f64) -> f64 {
        self.a * (self.rho1 * (y2 - 0.5 * self.h)).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub y1: f64,
    pub y2: f64,
}

impl Point2 {
    pub const fn new(y1: f64, y2: f64) -> Self {
        Self { y1, y2 }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.y1 - other.y1).hypot(self.y2 - other.y2)
    }

    pub fn norm(&self) -> f64 {
        self.y1.hypot(self.y2)
    }

    fn is_finite(&self) -> bool {
        self.y1.is_finite() && self.y2.is_finite()
    }
}

/// Per-pair intermediates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGeometry {
    /// `(y1 - x1)^2`
    pub alpha2: f64,
    /// `y2 - x2`
    pub beta: f64,
    /// `y2 - x2 + 3h`
    pub beta1: f64,
    /// `alpha^2 + beta^2`
    pub r2: f64,
    /// `alpha^2 + beta1^2`
    pub r1sq: f64,
}

impl KernelGeometry {
    pub fn new(y: &Point2, x: &Point2, params: &KernelParams) -> Self {
        let dy1 = y.y1 - x.y1;
        let alpha2 = dy1 * dy1;
        let beta = y.y2 - x.y2;
        let beta1 = beta + 3.0 * params.h;
        Self {
            alpha2,
            beta,
            beta1,
            r2: alpha2 + beta * beta,
            r1sq: alpha2 + beta1 * beta1,
        }
    }
}

/// A validated `(y, x)` pair with everything the integrands reuse.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PreparedPair {
    params: KernelParams,
    geom: KernelGeometry,
    y2: f64,
    x2: f64,
    /// `y1 - x1`
    t: f64,
    cos_y: f64,
    sin_y: f64,
}

impl PreparedPair {
    pub(crate) fn new(y: &Point2, x: &Point2, params: &KernelParams) -> Result<Self> {
        if !y.is_finite() || !x.is_finite() {
            return Err(Error::domain("kernel points must be finite"));
        }
        check_height(y.y2, params, "y2")?;
        check_height(x.y2, params, "x2")?;
        let geom = KernelGeometry::new(y, x, params);
        if geom.r2 == 0.0 {
            return Err(Error::Singular { y1: y.y1, y2: y.y2 });
        }
        if geom.beta1 <= 0.0 {
            return Err(Error::domain(format!(
                "y2 - x2 + 3h must be positive, got {}",
                geom.beta1
            )));
        }
        let theta = params.rho1 * (y.y2 - 0.5 * params.h);
        Ok(Self {
            params: *params,
            geom,
            y2: y.y2,
            x2: x.y2,
            t: y.y1 - x.y1,
            cos_y: theta.cos(),
            sin_y: theta.sin(),
        })
    }

    pub(crate) fn geometry(&self) -> &KernelGeometry {
        &self.geom
    }

    fn eta(&self, u: f64) -> f64 {
        (u * u + self.geom.alpha2).sqrt()
    }

    fn decay(&self, eta: f64) -> f64 {
        self.params.a * self.cos_y * (self.params.rho1 * eta).cosh()
    }

    /// `K(w)` and `F(w) = K(w) / (w - x2)` at `w = y2 + i eta`.
    fn k_and_f(&self, eta: f64) -> (Complex64, Complex64) {
        let p = &self.params;
        let w = Complex64::new(self.y2, eta);
        let k = (-p.a * ((w - 0.5 * p.h) * p.rho1).cos()).exp() / (w + 3.0 * p.h - self.x2);
        (k, k / Complex64::new(self.geom.beta, eta))
    }

    pub(crate) fn integrand_direct(&self, u: f64) -> f64 {
        let eta = self.eta(u);
        if eta < SMALL_ETA * self.params.h {
            return self.integrand_decomposed(u);
        }
        if self.decay(eta) > EXP_UNDERFLOW {
            return 0.0;
        }
        let (_, f) = self.k_and_f(eta);
        f.im * u / eta
    }

    pub(crate) fn integrand_decomposed(&self, u: f64) -> f64 {
        let p = &self.params;
        let g = &self.geom;
        let eta = self.eta(u);
        let decay = self.decay(eta);
        if decay > EXP_UNDERFLOW {
            return 0.0;
        }
        let z = p.rho1 * eta;
        let sh_over_eta = if z < 1e-4 {
            p.rho1 * (1.0 + z * z / 6.0)
        } else {
            z.sinh() / eta
        };
        let phase = p.a * self.sin_y * z.sinh();
        let sinc = if phase.abs() < 1e-4 {
            1.0 - phase * phase / 6.0
        } else {
            phase.sin() / phase
        };
        let sin_over_eta = sinc * p.a * self.sin_y * sh_over_eta;
        let first = (g.beta * g.beta1 - eta * eta) * sin_over_eta;
        let second = (g.beta + g.beta1) * phase.cos();
        let u2 = u * u;
        u * (first - second) * (-decay).exp() / ((u2 + g.r2) * (u2 + g.r1sq))
    }

    /// `y1`- and `y2`-partials of the direct integrand.
    pub(crate) fn integrand_gradient(&self, u: f64) -> (f64, f64) {
        let p = &self.params;
        let eta = self.eta(u);
        if eta == 0.0 || self.decay(eta) > EXP_UNDERFLOW {
            return (0.0, 0.0);
        }
        let w = Complex64::new(self.y2, eta);
        let (_, f) = self.k_and_f(eta);
        let log_derivative = p.a * p.rho1 * ((w - 0.5 * p.h) * p.rho1).sin()
            - (w + 3.0 * p.h - self.x2).inv()
            - Complex64::new(self.geom.beta, eta).inv();
        let fp = f * log_derivative;
        let d2 = fp.im * u / eta;
        if eta < SMALL_ETA * p.h {
            return (0.0, d2);
        }
        let d1 = self.t / eta * u * (fp.re / eta - f.im / (eta * eta));
        (d1, d2)
    }

    /// `1 / (2 pi K(x2))`.
    pub(crate) fn normalization(&self) -> f64 {
        anchor_reciprocal(self.x2, &self.params) / (2.0 * PI)
    }

    fn scale(&self) -> f64 {
        0.5 * self.geom.r2.sqrt().min(self.params.h)
    }

    fn inner_config(&self, quad: &QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: quad.abs_tol / self.normalization(),
            ..*quad
        }
    }

    /// `Phi` with its quadrature estimate, whether or not it converged.
    pub(crate) fn phi(&self, quad: &QuadratureConfig) -> PhiValue {
        let norm = self.normalization();
        let res = semi_infinite_with_error(
            |u| (self.integrand_direct(u), 0.0),
            self.scale(),
            &self.inner_config(quad),
        );
        PhiValue {
            value: -norm * res.value,
            error_estimate: norm * res.error_estimate,
            evaluations: res.evaluations,
            converged: res.converged,
        }
    }

    pub(crate) fn grad_phi(&self, quad: &QuadratureConfig) -> GradPhi {
        let norm = self.normalization();
        let cfg = self.inner_config(quad);
        let d1 = if self.t == 0.0 {
            None
        } else {
            Some(semi_infinite_with_error(
                |u| (self.integrand_gradient(u).0, 0.0),
                self.scale(),
                &cfg,
            ))
        };
        let d2 = semi_infinite_with_error(|u| (self.integrand_gradient(u).1, 0.0), self.scale(), &cfg);
        let (v1, e1, n1, c1) = d1.map_or((0.0, 0.0, 0, true), |r| {
            (r.value, r.error_estimate, r.evaluations, r.converged)
        });
        let (g1, g2) = (-norm * v1, -norm * d2.value);
        let err = [norm * e1, norm * d2.error_estimate];
        // a component far below the other may miss its own relative target
        // while the vector meets it
        let converged = (c1 && d2.converged) || err[0].hypot(err[1]) <= quad.target(g1.hypot(g2));
        GradPhi {
            d_y1: g1,
            d_y2: g2,
            error_estimate: err,
            evaluations: n1 + d2.evaluations,
            converged,
        }
    }
}

fn check_height(y2: f64, params: &KernelParams, name: &str) -> Result<()> {
    if params.in_decay_window(y2) {
        Ok(())
    } else {
        let (lo, hi) = params.decay_window();
        Err(Error::domain(format!(
            "{name} = {y2} outside the kernel's decay window ({lo}, {hi})"
        )))
    }
}

/// `1 / K(x2) = 3h exp(a cos(rho1 (x2 - h/2)))`.
fn anchor_reciprocal(x2: f64, params: &KernelParams) -> f64 {
    3.0 * params.h * params.decay_amplitude(x2).exp()
}

/// `K(omega)` for the pole position fixed by `x2`.
pub fn eval_k(omega: ComplexValue, x2: f64, params: &KernelParams) -> Result<ComplexValue> {
    if !(omega.re.is_finite() && omega.im.is_finite() && x2.is_finite()) {
        return Err(Error::domain("K(omega) needs finite inputs"));
    }
    check_height(x2, params, "x2")?;
    let shift = omega + 3.0 * params.h - x2;
    if shift.norm() < 1e-12 * params.h {
        return Err(Error::domain(format!(
            "omega = {omega} is within 1e-12 h of the pole of K"
        )));
    }
    let k = (-params.a * ((omega - 0.5 * params.h) * params.rho1).cos()).exp() / shift;
    if k.re.is_finite() && k.im.is_finite() {
        Ok(k)
    } else {
        Err(Error::domain(format!("K(omega) overflows at omega = {omega}")))
    }
}

/// `K(x2) = (3h)^-1 exp(-a cos(rho1 (x2 - h/2)))`, real and positive.
pub fn eval_k_at_anchor(x2: f64, params: &KernelParams) -> Result<f64> {
    if !x2.is_finite() {
        return Err(Error::domain("x2 must be finite"));
    }
    check_height(x2, params, "x2")?;
    Ok(anchor_reciprocal(x2, params).recip())
}

fn check_u(u: f64) -> Result<()> {
    if u >= 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("u must be finite and >= 0, got {u}")))
    }
}

/// `Im[K(y2 + i eta) / (y2 - x2 + i eta)] * u / eta` by complex arithmetic.
pub fn phi_integrand_direct(u: f64, y: &Point2, x: &Point2, params: &KernelParams) -> Result<f64> {
    check_u(u)?;
    Ok(PreparedPair::new(y, x, params)?.integrand_direct(u))
}

/// The same integrand through its real two-term expansion
///
/// ```text
/// [(beta beta1 - eta^2) sin(phase) - eta (beta + beta1) cos(phase)]
///     / ((u^2 + r^2)(u^2 + r1^2) exp(a cos(theta) ch(rho1 eta))) * u / eta,
/// phase = a sin(theta) sh(rho1 eta),  theta = rho1 (y2 - h/2),
/// ```
///
/// with `sin(phase) / eta` evaluated through its `eta -> 0` limit.
pub fn phi_integrand_decomposed(u: f64, y: &Point2, x: &Point2, params: &KernelParams) -> Result<f64> {
    check_u(u)?;
    Ok(PreparedPair::new(y, x, params)?.integrand_decomposed(u))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPhi {
    pub d_y1: f64,
    pub d_y2: f64,
    pub error_estimate: [f64; 2],
    pub evaluations: usize,
    pub converged: bool,
}

impl GradPhi {
    pub fn dot(&self, n: (f64, f64)) -> f64 {
        self.d_y1 * n.0 + self.d_y2 * n.1
    }
}

/// `Phi(y, x)`. Fails with [`Error::Accuracy`] (carrying the best estimate)
/// when the `u`-integral misses its tolerance.
pub fn eval_phi(y: &Point2, x: &Point2, params: &KernelParams, quad: &QuadratureConfig) -> Result<PhiValue> {
    let phi = PreparedPair::new(y, x, params)?.phi(quad);
    if phi.converged {
        Ok(phi)
    } else {
        Err(Error::Accuracy {
            estimate: phi.value,
            error_estimate: phi.error_estimate,
        })
    }
}

/// `(dPhi/dy1, dPhi/dy2)`, differentiating the integrand under the integral
/// sign.
pub fn eval_grad_phi_y(
    y: &Point2,
    x: &Point2,
    params: &KernelParams,
    quad: &QuadratureConfig,
) -> Result<GradPhi> {
    let grad = PreparedPair::new(y, x, params)?.grad_phi(quad);
    if grad.converged {
        Ok(grad)
    } else {
        Err(Error::Accuracy {
            estimate: grad.d_y1.hypot(grad.d_y2),
            error_estimate: grad.error_estimate[0].hypot(grad.error_estimate[1]),
        })
    }
}

/// Right-hand side of the decay estimate,
/// `C0 exp(-a cos(rho1 (y2 - h/2)) ch(rho1 alpha)) (1 + ln(1 + 15 h^2 / r^2))`.
/// Infinite at `y == x`.
pub fn phi_upper_bound(y: &Point2, x: &Point2, params: &KernelParams, c0: f64) -> f64 {
    let geom = KernelGeometry::new(y, x, params);
    if geom.r2 == 0.0 {
        return f64::INFINITY;
    }
    let decay = params.decay_amplitude(y.y2) * (params.rho1 * geom.alpha2.sqrt()).cosh();
    c0 * (-decay).exp() * log_factor(params.h, geom.r2)
}

fn log_factor(h: f64, r2: f64) -> f64 {
    1.0 + (15.0 * h * h / r2).ln_1p()
}

/// `|Phi| exp(a cos(rho1 (y2 - h/2)) ch(rho1 alpha)) / (1 + ln(1 + 15h^2/r^2))`,
/// the smallest constant making the decay estimate hold at this pair.
pub fn bound_ratio(y: &Point2, x: &Point2, params: &KernelParams, quad: &QuadratureConfig) -> Result<f64> {
    let pair = PreparedPair::new(y, x, params)?;
    let phi = pair.phi(quad);
    if !phi.converged {
        return Err(Error::Accuracy {
            estimate: phi.value,
            error_estimate: phi.error_estimate,
        });
    }
    if phi.value == 0.0 {
        return Ok(0.0);
    }
    let geom = pair.geometry();
    let decay = params.decay_amplitude(y.y2) * (params.rho1 * geom.alpha2.sqrt()).cosh();
    Ok((phi.value.abs().ln() + decay).exp() / log_factor(params.h, geom.r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    /// Fitted constant, the supremum of [`bound_ratio`] over the grid.
    pub c0: f64,
    /// `(alpha, y2, x2)` attaining the supremum.
    pub argmax: (f64, f64, f64),
    pub samples: usize,
}

/// Fits the decay-estimate constant over `alphas x heights`, with
/// `y = (alpha, y2)` and `x = (0, x2)`. Coincident pairs are skipped.
pub fn certify_bound_constant(
    params: &KernelParams,
    alphas: &[f64],
    heights: &[(f64, f64)],
    quad: &QuadratureConfig,
) -> Result<BoundCertificate> {
    let pairs: Vec<(f64, f64, f64)> = alphas
        .iter()
        .flat_map(|&al| heights.iter().map(move |&(y2, x2)| (al, y2, x2)))
        .filter(|&(al, y2, x2)| !(al == 0.0 && y2 == x2))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Config("bound certification needs a non-empty grid".into()));
    }
    let ratios = pairs
        .par_iter()
        .map(|&(al, y2, x2)| bound_ratio(&Point2::new(al, y2), &Point2::new(0.0, x2), params, quad))
        .collect::<Result<Vec<f64>>>()?;
    let (best, c0) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok(BoundCertificate {
        c0,
        argmax: pairs[best],
        samples: pairs.len(),
    })
}
