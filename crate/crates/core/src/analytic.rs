//! Closed-form harmonic functions used as ground truth.
//!
//! Identifiers follow `family:key=value,...`:
//!
//! | id | function |
//! |----|----------|
//! | `zero` | `0` |
//! | `strip_mode:n=1,A=1,B=0[,rho=1]` | `sin(n rho y2) (A e^{n rho y1} + B e^{-n rho y1})` |
//! | `re_exp:lambda=0.4` / `im_exp:lambda=0.4` | `Re` / `Im` of `exp(lambda (y1 + i y2))` |
//! | `re_poly:k=2` / `im_poly:k=2` | `Re` / `Im` of `(y1 + i y2)^k` |

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::domain::{parse_family, BandDomain, CurveKind, FamilyParams};
use crate::error::{Error, Result};
use crate::kernel::Point2;

/// `sin(n rho y2) (A e^{n rho y1} + B e^{-n rho y1})`, vanishing on
/// `y2 = 0` and `y2 = h = pi / rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripMode {
    pub n: u32,
    pub coef_a: f64,
    pub coef_b: f64,
    pub rho: f64,
}

/// Harmonic functions of the whole plane; they do not vanish on the band's
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntireHarmonic {
    ReExp(f64),
    ImExp(f64),
    RePoly(u32),
    ImPoly(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarmonicFn {
    Zero,
    Strip(StripMode),
    Entire(EntireHarmonic),
}

/// `sin(pi s)`, exactly zero at integer `s`.
fn sin_pi(s: f64) -> f64 {
    let r = s - 2.0 * (0.5 * s).round();
    if r == r.trunc() {
        return 0.0 * s.signum();
    }
    (PI * r).sin()
}

fn cos_pi(s: f64) -> f64 {
    sin_pi(s + 0.5)
}

impl StripMode {
    fn h(&self) -> f64 {
        PI / self.rho
    }

    fn k(&self) -> f64 {
        self.n as f64 * self.rho
    }

    fn value(&self, y: &Point2) -> f64 {
        let s = self.n as f64 * (y.y2 / self.h());
        let k = self.k();
        sin_pi(s) * (self.coef_a * (k * y.y1).exp() + self.coef_b * (-k * y.y1).exp())
    }

    fn gradient(&self, y: &Point2) -> (f64, f64) {
        let s = self.n as f64 * (y.y2 / self.h());
        let k = self.k();
        let (ep, em) = ((k * y.y1).exp(), (-k * y.y1).exp());
        (
            k * sin_pi(s) * (self.coef_a * ep - self.coef_b * em),
            k * cos_pi(s) * (self.coef_a * ep + self.coef_b * em),
        )
    }
}

impl EntireHarmonic {
    /// `g(z)` and `g'(z)` of the holomorphic function whose real or
    /// imaginary part this is.
    fn holomorphic(&self, z: Complex64) -> (Complex64, Complex64) {
        match *self {
            EntireHarmonic::ReExp(l) | EntireHarmonic::ImExp(l) => {
                let e = (z * l).exp();
                (e, e * l)
            }
            EntireHarmonic::RePoly(k) | EntireHarmonic::ImPoly(k) => {
                let d = if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z.powu(k - 1) * k as f64
                };
                (z.powu(k), d)
            }
        }
    }

    fn takes_real_part(&self) -> bool {
        matches!(self, EntireHarmonic::ReExp(_) | EntireHarmonic::RePoly(_))
    }

    fn value(&self, y: &Point2) -> f64 {
        let (g, _) = self.holomorphic(Complex64::new(y.y1, y.y2));
        if self.takes_real_part() {
            g.re
        } else {
            g.im
        }
    }

    fn gradient(&self, y: &Point2) -> (f64, f64) {
        // Cauchy-Riemann: grad Re g = (Re g', -Im g'), grad Im g = (Im g', Re g')
        let (_, d) = self.holomorphic(Complex64::new(y.y1, y.y2));
        if self.takes_real_part() {
            (d.re, -d.im)
        } else {
            (d.im, d.re)
        }
    }
}

impl HarmonicFn {
    pub fn strip_mode(n: u32, coef_a: f64, coef_b: f64, rho: f64) -> Self {
        HarmonicFn::Strip(StripMode { n, coef_a, coef_b, rho })
    }

    pub fn eval_u(&self, y: &Point2) -> f64 {
        match self {
            HarmonicFn::Zero => 0.0,
            HarmonicFn::Strip(m) => m.value(y),
            HarmonicFn::Entire(e) => e.value(y),
        }
    }

    pub fn eval_grad_u(&self, y: &Point2) -> (f64, f64) {
        match self {
            HarmonicFn::Zero => (0.0, 0.0),
            HarmonicFn::Strip(m) => m.gradient(y),
            HarmonicFn::Entire(e) => e.gradient(y),
        }
    }

    /// Exponential rate `c` with `|U| + |grad U| <= M exp(c |y|)`.
    /// Polynomials are given a small positive rate.
    pub fn growth_rate(&self) -> f64 {
        match *self {
            HarmonicFn::Zero => 0.0,
            HarmonicFn::Strip(m) => {
                if m.coef_a == 0.0 && m.coef_b == 0.0 {
                    0.0
                } else {
                    m.k()
                }
            }
            HarmonicFn::Entire(EntireHarmonic::ReExp(l) | EntireHarmonic::ImExp(l)) => l.abs(),
            HarmonicFn::Entire(EntireHarmonic::RePoly(k) | EntireHarmonic::ImPoly(k)) => {
                if k == 0 {
                    0.0
                } else {
                    0.1
                }
            }
        }
    }

    /// Whether the function vanishes identically on `y2 = 0` and `y2 = h`.
    pub fn vanishes_on_strip(&self, h: f64) -> bool {
        match self {
            HarmonicFn::Zero => true,
            HarmonicFn::Strip(m) => (m.h() - h).abs() <= 1e-14 * h,
            HarmonicFn::Entire(_) => false,
        }
    }

    /// Parses an identifier; `strip_mode` without `rho=` takes
    /// `default_rho`.
    pub fn parse(id: &str, default_rho: f64) -> Result<Self> {
        let (name, params) = parse_family(id)?;
        let p = FamilyParams::new(id, params);
        let whole = |key: &str| -> Result<u32> {
            let v = p.require(key)?;
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(Error::Config(format!("`{id}`: {key} must be a non-negative integer")))
            }
        };
        let f = match name {
            "zero" => {
                p.check_known(&[])?;
                HarmonicFn::Zero
            }
            "strip_mode" => {
                p.check_known(&["n", "A", "B", "rho"])?;
                let n = whole("n")?;
                if n == 0 {
                    return Err(Error::Config(format!("`{id}`: n must be positive")));
                }
                let rho = p.get("rho")?.unwrap_or(default_rho);
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::Config(format!("`{id}`: rho must be positive")));
                }
                HarmonicFn::strip_mode(n, p.get("A")?.unwrap_or(0.0), p.get("B")?.unwrap_or(0.0), rho)
            }
            "re_exp" | "im_exp" => {
                p.check_known(&["lambda"])?;
                let l = p.require("lambda")?;
                HarmonicFn::Entire(if name == "re_exp" {
                    EntireHarmonic::ReExp(l)
                } else {
                    EntireHarmonic::ImExp(l)
                })
            }
            "re_poly" | "im_poly" => {
                p.check_known(&["k"])?;
                let k = whole("k")?;
                HarmonicFn::Entire(if name == "re_poly" {
                    EntireHarmonic::RePoly(k)
                } else {
                    EntireHarmonic::ImPoly(k)
                })
            }
            _ => return Err(Error::Config(format!("unknown harmonic function `{id}`"))),
        };
        Ok(f)
    }
}

impl fmt::Display for HarmonicFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HarmonicFn::Zero => f.write_str("zero"),
            HarmonicFn::Strip(m) => write!(f, "strip_mode:n={},A={},B={},rho={}", m.n, m.coef_a, m.coef_b, m.rho),
            HarmonicFn::Entire(EntireHarmonic::ReExp(l)) => write!(f, "re_exp:lambda={l}"),
            HarmonicFn::Entire(EntireHarmonic::ImExp(l)) => write!(f, "im_exp:lambda={l}"),
            HarmonicFn::Entire(EntireHarmonic::RePoly(k)) => write!(f, "re_poly:k={k}"),
            HarmonicFn::Entire(EntireHarmonic::ImPoly(k)) => write!(f, "im_poly:k={k}"),
        }
    }
}

/// `grad U . n` at the boundary point of `curve` above `y1`.
pub fn neumann_trace(fun: &HarmonicFn, domain: &BandDomain, curve: CurveKind, y1: f64) -> f64 {
    let y = domain.boundary_point(curve, y1);
    let g = fun.eval_grad_u(&y);
    let n = domain.exterior_normal(curve, y1);
    g.0 * n.0 + g.1 * n.1
}
