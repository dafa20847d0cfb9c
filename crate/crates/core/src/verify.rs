//! Numerical checks of the kernel's defining properties, each returning a
//! measured quantity against a pinned threshold.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::kernel::{
    certify_bound_constant, eval_grad_phi_y, eval_phi, phi_integrand_decomposed, phi_integrand_direct, KernelParams,
    Point2, PreparedPair,
};
use crate::quadrature::{integrate_semi_infinite, reference_inner_integral, QuadratureConfig};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub const EQUIVALENCE_TOL: f64 = 1e-10;
pub const INNER_INTEGRAL_TOL: f64 = 1e-8;
pub const BOUND_STABILITY_TOL: f64 = 0.01;
pub const SINGULARITY_MIN_RATIO: f64 = 5.0;
pub const HARMONICITY_MIN_ORDER: f64 = 1.8;
pub const GRADIENT_TOL: f64 = 1e-6;

/// Stencil widths for the harmonicity check.
pub const LAPLACIAN_WIDTHS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Radii for the singularity check.
pub const SINGULARITY_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    /// `true` when `measured` must stay at or below `threshold`.
    pub upper_limit: bool,
    pub detail: String,
}

impl SuiteOutcome {
    fn at_most(name: &'static str, measured: f64, threshold: f64, detail: String) -> Self {
        Self {
            name,
            passed: measured <= threshold,
            measured,
            threshold,
            upper_limit: true,
            detail,
        }
    }

    /// Relative distance to the threshold, positive when passing.
    pub fn margin(&self) -> f64 {
        let gap = if self.upper_limit {
            self.threshold - self.measured
        } else {
            self.measured - self.threshold
        };
        gap / self.threshold.abs()
    }

    fn at_least(name: &'static str, measured: f64, threshold: f64, detail: String) -> Self {
        Self {
            name,
            passed: measured >= threshold,
            measured,
            threshold,
            upper_limit: false,
            detail,
        }
    }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random pair `(y, x)` with heights in `(0, h)`, `|y1 - x1| <= alpha_max`
/// and `|y - x| >= min_dist`.
fn random_pair(rng: &mut ChaCha8Rng, h: f64, alpha_max: f64, min_dist: f64) -> (Point2, Point2) {
    loop {
        let y = Point2::new(rng.gen_range(-alpha_max..=alpha_max), rng.gen_range(0.02..0.98) * h);
        let x = Point2::new(0.0, rng.gen_range(0.02..0.98) * h);
        if y.distance(&x) >= min_dist {
            return (y, x);
        }
    }
}

/// Direct and decomposed integrands at `count` random admissible tuples
/// per parameter set.
pub fn equivalence_suite(param_sets: &[KernelParams], count: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut at = String::new();
    let mut tuples = 0;
    for params in param_sets {
        let per = count / param_sets.len().max(1);
        for _ in 0..per {
            let (y, x) = random_pair(&mut rng, params.h(), 5.0, 1e-3);
            // log-uniform u from 1e-8 to 1e2, with exact zeros
            let u = if rng.gen_bool(0.05) { 0.0 } else { 10f64.powf(rng.gen_range(-8.0..2.0)) };
            let d = phi_integrand_direct(u, &y, &x, params)?;
            let e = phi_integrand_decomposed(u, &y, &x, params)?;
            let dev = rel_dev(d, e);
            if dev > worst {
                worst = dev;
                at = format!("u={u:.3e} y=({:.4},{:.4}) x2={:.4} a={} rho1={}", y.y1, y.y2, x.y2, params.a(), params.rho1());
            }
            tuples += 1;
        }
    }
    Ok(SuiteOutcome::at_most(
        "equivalence",
        worst,
        EQUIVALENCE_TOL,
        format!("{tuples} tuples, max relative deviation at {at}"),
    ))
}

/// Adaptive quadrature of `u / ((u^2 + r^2)(u^2 + r1^2))` against its
/// closed form over random `(r, r1)`.
pub fn inner_integral_suite(count: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = QuadratureConfig::new(1e-300, 1e-12);
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for _ in 0..count {
        let r = 10f64.powf(rng.gen_range(-3.0..1.0));
        let r1 = r * (1.0 + 10f64.powf(rng.gen_range(-2.0..2.0)));
        let (r2, r1sq) = (r * r, r1 * r1);
        let exact = reference_inner_integral(r2, r1sq)?;
        let quad = integrate_semi_infinite(|u| u / ((u * u + r2) * (u * u + r1sq)), &cfg);
        let dev = rel_dev(quad.value, exact);
        if dev > worst {
            worst = dev;
            at = (r, r1);
        }
    }
    Ok(SuiteOutcome::at_most(
        "inner_integral",
        worst,
        INNER_INTEGRAL_TOL,
        format!("{count} pairs, worst at r={:.4e} r1={:.4e}", at.0, at.1),
    ))
}

/// `count` equally spaced values `0, step, ..` with `step = alpha_max / (count - 1)`.
pub fn alpha_grid(alpha_max: f64, count: usize) -> Vec<f64> {
    let step = alpha_max / (count - 1) as f64;
    (0..count).map(|i| i as f64 * step).collect()
}

/// Fits the decay-estimate constant on a 50-point `alpha` grid over `[0, 5]`
/// times 50 height pairs, then on the same spacing extended to `[0, 10]`.
pub fn bound_fit_suite(params: &KernelParams) -> Result<SuiteOutcome> {
    let quad = QuadratureConfig::new(1e-300, 1e-10);
    let heights: Vec<(f64, f64)> = {
        let side = 50usize;
        // 50 pairs along a low-discrepancy walk through (0, h)^2
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        (0..side)
            .map(|i| {
                let s = (i as f64 + 0.5) / side as f64;
                let t = (0.5 + i as f64 * golden).fract();
                (s * params.h(), (0.02 + 0.96 * t) * params.h())
            })
            .collect()
    };
    let base = alpha_grid(5.0, 50);
    let step = base[1];
    let extended: Vec<f64> = (0..).map(|i| i as f64 * step).take_while(|&a| a <= 10.0 + 1e-12).collect();
    let c_base = certify_bound_constant(params, &base, &heights, &quad)?;
    let c_ext = certify_bound_constant(params, &extended, &heights, &quad)?;
    let change = (c_ext.c0 - c_base.c0).abs() / c_base.c0;
    let mut out = SuiteOutcome::at_most(
        "bound_fit",
        change,
        BOUND_STABILITY_TOL,
        format!(
            "C0*={:.6e} over alpha in [0,5], {:.6e} over [0,10] (argmax alpha={:.3}, y2={:.3}, x2={:.3})",
            c_base.c0, c_ext.c0, c_ext.argmax.0, c_ext.argmax.1, c_ext.argmax.2
        ),
    );
    out.passed &= c_base.c0.is_finite() && c_ext.c0.is_finite();
    Ok(out)
}

/// `Phi(x + r d) + ln(r) / (2 pi)` at shrinking radii `r` along a fixed
/// direction `d`. Returns the successive differences.
pub fn singularity_differences(params: &KernelParams, quad: &QuadratureConfig, x: &Point2) -> Result<Vec<f64>> {
    let dir = (0.6, 0.8);
    let reg = SINGULARITY_RADII
        .iter()
        .map(|&r| {
            let y = Point2::new(x.y1 + r * dir.0, x.y2 + r * dir.1);
            Ok(eval_phi(&y, x, params, quad)?.value + r.ln() / (2.0 * PI))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(reg.windows(2).map(|w| (w[1] - w[0]).abs()).collect())
}

pub fn singularity_suite(params: &KernelParams) -> Result<SuiteOutcome> {
    let quad = QuadratureConfig::new(1e-15, 1e-13);
    let x = Point2::new(0.0, 0.5 * params.h());
    let diffs = singularity_differences(params, &quad, &x)?;
    let ratio = diffs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    Ok(SuiteOutcome::at_least(
        "singularity",
        ratio,
        SINGULARITY_MIN_RATIO,
        format!("successive differences {:?} around x=(0,h/2)", diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()),
    ))
}

/// Five-point Laplacian in `y`. Uses the best quadrature estimate even when
/// it sits at the roundoff floor, since the stencil itself measures the noise.
fn laplacian(params: &KernelParams, quad: &QuadratureConfig, y: &Point2, x: &Point2, w: f64) -> Result<f64> {
    let phi = |p: Point2| PreparedPair::new(&p, x, params).map(|pair| pair.phi(quad).value);
    let c = phi(*y)?;
    let sum = phi(Point2::new(y.y1 + w, y.y2))?
        + phi(Point2::new(y.y1 - w, y.y2))?
        + phi(Point2::new(y.y1, y.y2 + w))?
        + phi(Point2::new(y.y1, y.y2 - w))?;
    Ok((sum - 4.0 * c) / (w * w))
}

/// Sample points for the harmonicity check: 20 points at distance between
/// 0.5 and 2 from `x = (0, h/2)`, heights kept inside `(0.1 h, 0.9 h)`.
pub fn harmonicity_points(params: &KernelParams) -> Vec<Point2> {
    let h = params.h();
    let x = Point2::new(0.0, 0.5 * h);
    (0..20)
        .map(|i| {
            let angle = 2.0 * PI * (i as f64 + 0.25) / 20.0;
            let r = 0.6 + 1.2 * ((i * 7) % 20) as f64 / 19.0;
            let y2 = (x.y2 + r * angle.sin()).clamp(0.1 * h, 0.9 * h);
            let dy = y2 - x.y2;
            let dx = (r * r - dy * dy).max(0.36).sqrt();
            Point2::new(dx.copysign(angle.cos()), y2)
        })
        .collect()
}

/// Observed convergence orders of the five-point Laplacian of `Phi(., x)`
/// at each point, over consecutive halvings of the stencil width.
pub fn harmonicity_orders(params: &KernelParams, quad: &QuadratureConfig) -> Result<Vec<(Point2, Vec<f64>, [f64; 3])>> {
    let x = Point2::new(0.0, 0.5 * params.h());
    harmonicity_points(params)
        .par_iter()
        .map(|y| {
            let mut lap = [0.0; 3];
            for (slot, &w) in lap.iter_mut().zip(LAPLACIAN_WIDTHS.iter()) {
                *slot = laplacian(params, quad, y, &x, w)?;
            }
            let orders = lap
                .windows(2)
                .zip(LAPLACIAN_WIDTHS.windows(2))
                .map(|(l, w)| (l[0].abs() / l[1].abs()).ln() / (w[0] / w[1]).ln())
                .collect();
            Ok((*y, orders, lap))
        })
        .collect()
}

pub fn harmonicity_suite(params: &KernelParams) -> Result<SuiteOutcome> {
    let quad = QuadratureConfig::new(1e-300, 1e-13);
    let rows = harmonicity_orders(params, &quad)?;
    let worst = rows
        .iter()
        .flat_map(|(_, o, _)| o.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let largest = rows.iter().map(|(_, _, l)| l[0].abs()).fold(0.0, f64::max);
    Ok(SuiteOutcome::at_least(
        "harmonicity",
        worst,
        HARMONICITY_MIN_ORDER,
        format!("{} points, min order over widths {LAPLACIAN_WIDTHS:?}, largest |lap| {largest:.3e}", rows.len()),
    ))
}

/// Central-difference Richardson derivative of `Phi` in `y` with step `delta`.
pub fn fd_gradient(y: &Point2, x: &Point2, params: &KernelParams, quad: &QuadratureConfig, delta: f64) -> Result<(f64, f64)> {
    let phi = |p: Point2| eval_phi(&p, x, params, quad).map(|v| v.value);
    let d = |e: (f64, f64)| -> Result<f64> {
        let at = |k: f64| phi(Point2::new(y.y1 + k * delta * e.0, y.y2 + k * delta * e.1));
        Ok((8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * delta))
    };
    Ok((d((1.0, 0.0))?, d((0.0, 1.0))?))
}

/// Analytic gradient against finite differences at `count` random pairs.
pub fn gradient_suite(params: &KernelParams, count: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = params.h();
    let pairs: Vec<(Point2, Point2)> = (0..count)
        .map(|_| loop {
            let (y, x) = random_pair(&mut rng, h, 5.0, 0.3);
            if y.y2 > 0.05 * h && y.y2 < 0.95 * h {
                break (y, x);
            }
        })
        .collect();
    let quad = QuadratureConfig::new(1e-300, 1e-12);
    let devs = pairs
        .par_iter()
        .map(|(y, x)| {
            let g = eval_grad_phi_y(y, x, params, &quad)?;
            let fd = fd_gradient(y, x, params, &quad, 1e-3)?;
            let num = (g.d_y1 - fd.0).hypot(g.d_y2 - fd.1);
            let den = g.d_y1.hypot(g.d_y2).max(fd.0.hypot(fd.1));
            Ok(if den == 0.0 { 0.0 } else { num / den })
        })
        .collect::<Result<Vec<f64>>>()?;
    let (i, worst) = devs
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
    Ok(SuiteOutcome::at_most(
        "gradient",
        worst,
        GRADIENT_TOL,
        format!(
            "{count} pairs, worst at y=({:.4},{:.4}) x2={:.4}",
            pairs[i].0.y1, pairs[i].0.y2, pairs[i].1.y2
        ),
    ))
}

/// Every suite for one parameter set, in a fixed order.
pub fn run_all(params: &KernelParams, seed: u64) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        equivalence_suite(&[*params], 1000, seed)?,
        inner_integral_suite(100, seed)?,
        bound_fit_suite(params)?,
        harmonicity_suite(params)?,
        singularity_suite(params)?,
        gradient_suite(params, 100, seed)?,
    ])
}
