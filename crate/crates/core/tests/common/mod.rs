//! Reference computations that share no code with the library: a
//! tanh-sinh rule and the kernel written as a line integral in the
//! imaginary direction,
//!
//!   Phi(y, x) = -1 / (2 pi K(x2)) int_{|y1 - x1|}^inf Im F(y2 + i s) ds,
//!   F(w) = K(w) / (w - x2),
//!
//! whose gradient follows from the fundamental theorem of calculus.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Double-exponential quadrature on `[a, b]`, halving the step until two
/// levels agree to `tol` relative.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let r = 0.5 * (b - a);
    let node = |t: f64| {
        let s = 0.5 * PI * t.sinh();
        let x = s.tanh();
        let w = 0.5 * PI * t.cosh() / (s.cosh() * s.cosh());
        // distance to the nearer endpoint, kept exact near +-1
        let d = 1.0 / (s.abs().exp() * s.cosh());
        (x, w, d)
    };
    let eval = |t: f64| {
        let (x, w, d) = node(t);
        if w == 0.0 || d == 0.0 {
            return 0.0;
        }
        let pt = if x >= 0.0 { b - r * d } else { a + r * d };
        let v = f(pt) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let t_max = 4.0;
    let mut step = 0.5;
    let n = (t_max / step) as i64;
    let mut sum: f64 = (-n..=n).map(|k| eval(k as f64 * step)).sum();
    let mut prev = sum * step * r;
    for _ in 0..12 {
        step *= 0.5;
        let n = (t_max / step) as i64;
        let odd: f64 = (-n..=n).filter(|k| k % 2 != 0).map(|k| eval(k as f64 * step)).sum();
        sum += odd;
        let cur = sum * step * r;
        if (cur - prev).abs() <= tol * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub rho: f64,
    pub a: f64,
    pub rho1: f64,
}

impl Kernel {
    pub fn h(&self) -> f64 {
        PI / self.rho
    }

    pub fn k(&self, w: Complex64, x2: f64) -> Complex64 {
        let h = self.h();
        (-self.a * ((w - h / 2.0) * self.rho1).cos()).exp() / (w + 3.0 * h - x2)
    }

    fn f(&self, w: Complex64, x2: f64) -> Complex64 {
        self.k(w, x2) / (w - x2)
    }

    fn k_real(&self, x2: f64) -> f64 {
        (-self.a * (self.rho1 * (x2 - self.h() / 2.0)).cos()).exp() / (3.0 * self.h())
    }

    /// `Phi(y, x)` along the vertical ray from `y2 + i|y1 - x1|`.
    pub fn phi(&self, y: (f64, f64), x: (f64, f64)) -> f64 {
        let al = (y.0 - x.0).abs();
        let decay0 = self.a * (self.rho1 * (y.1 - self.h() / 2.0)).cos();
        // far end: kernel factor down by e^-120 from its start
        let target = (decay0 * (self.rho1 * al).cosh() + 120.0) / decay0;
        let s_max = target.acosh() / self.rho1;
        let g = |s: f64| self.f(Complex64::new(y.1, s), x.1).im;
        // split at the near-singular start for pairs close in y2
        let mid = al + (y.1 - x.1).abs().max(1e-3);
        let integral = if mid < s_max {
            tanh_sinh(g, al, mid, 1e-14) + tanh_sinh(g, mid, s_max, 1e-14)
        } else {
            tanh_sinh(g, al, s_max, 1e-14)
        };
        -integral / (2.0 * PI * self.k_real(x.1))
    }

    pub fn grad_phi(&self, y: (f64, f64), x: (f64, f64)) -> (f64, f64) {
        let t = y.0 - x.0;
        let f = self.f(Complex64::new(y.1, t.abs()), x.1);
        let norm = 2.0 * PI * self.k_real(x.1);
        (t.signum() * f.im / norm, -f.re / norm)
    }
}

/// Values computed once with 30-digit arithmetic.
pub mod frozen {
    /// `K(pi/2 + i)`, `x2 = pi/2`, `a = 1`, `rho1 = 0.5`, `h = pi`.
    pub const K_SAMPLE: (f64, f64) = (0.033_973_884_570_039_413_747_690_0, -0.003_604_741_110_236_829_288_469_39);
    /// `K(h/2)` at `x2 = h/2`, `a = 2`, `h = pi`.
    pub const K_ANCHOR_A2: f64 = 0.014_359_519_534_565_753_190_581_0;
    /// `int_0^inf exp(-ch u) du = K_0(1)`.
    pub const BESSEL_K0_1: f64 = 0.421_024_438_240_708_333_335_627;
    /// `Phi((0.5, 2), (0, pi/2))` with `rho = 1, a = 3, rho1 = 0.5`.
    pub const PHI_SAMPLE: f64 = 0.101_597_106_375_651_143_833_048;
    /// `a cos(rho1 h / 2)` for `a = 3, rho1 = 0.5, rho = 1`.
    pub const A1: f64 = 2.121_320_343_559_642_57;
    /// Truncation root for `c = 0.4`, `tol = 1e-12`, same kernel.
    pub const TRUNCATION_ROOT: f64 = 6.992_984_128_219_001_028_39;
}
