use std::f64::consts::PI;

use approx::assert_relative_eq;
use carleman_core::analytic::HarmonicFn;
use carleman_core::domain::{BandDomain, BoundaryCurve, CurveKind, PointClass};
use carleman_core::interp::MonotoneCubic;
use carleman_core::representation::{BoundaryIntegrator, CauchyTrace};
use carleman_core::{Error, KernelParams, Point2, QuadratureConfig};

fn kernel() -> KernelParams {
    KernelParams::new(1.0, 3.0, 0.5).unwrap()
}

fn bumpy(h: f64) -> BandDomain {
    let lower = BoundaryCurve::new(CurveKind::Lower, "bump:base=0,height=0.3,center=1,width=0.8".parse().unwrap()).unwrap();
    let upper = BoundaryCurve::new(CurveKind::Upper, format!("sinusoid:c0={h},c1=0.15,c2=0.7").parse().unwrap()).unwrap();
    BandDomain::new(lower, upper, h).unwrap()
}

fn strip_traces(n: u32, a: f64, b: f64) -> (HarmonicFn, CauchyTrace, CauchyTrace) {
    let m = HarmonicFn::strip_mode(n, a, b, 1.0);
    (m, CauchyTrace::analytic(CurveKind::Lower, m), CauchyTrace::analytic(CurveKind::Upper, m))
}

#[test]
fn reconstruct_and_green_identity_agree_when_data_vanish() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let q = QuadratureConfig::new(1e-13, 1e-9);
    let bi = BoundaryIntegrator::new(&d, &p, q).unwrap();
    let (m, t1, t2) = strip_traces(1, 0.7, -0.4);
    for x in [Point2::new(0.3, 0.9), Point2::new(-1.2, 2.6), Point2::new(2.0, 1.4)] {
        let r = bi.reconstruct(&x, &t1, &t2).unwrap();
        let g = bi.green_identity_value(&x, &m).unwrap();
        assert!((r.value - g.value).abs() <= 10.0 * (r.quad_error + g.error_estimate), "{x:?}");
        assert_relative_eq!(r.value, m.eval_u(&x), max_relative = 1e-8);
    }
}

#[test]
fn doubling_truncation_changes_little() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let (_, t1, t2) = strip_traces(1, 1.0, 0.0);
    let x = Point2::new(1.0, PI / 4.0);
    let base = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-12, 1e-6)).unwrap();
    let r = base.reconstruct(&x, &t1, &t2).unwrap();
    let w = base.clone().with_truncation_factor(2.0).reconstruct(&x, &t1, &t2).unwrap();
    assert_relative_eq!(w.truncation_y, 2.0 * r.truncation_y);
    assert!((w.value - r.value).abs() <= r.quad_error);
}

#[test]
fn accuracy_improves_as_tolerance_tightens() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let (m, t1, t2) = strip_traces(1, 1.0, 0.0);
    let x = Point2::new(1.0, PI / 4.0);
    let exact = m.eval_u(&x);
    let mut prev: Option<(f64, f64)> = None;
    for rel in [1e-1, 5e-2, 2.5e-2, 1.25e-2] {
        let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-300, rel)).unwrap();
        let r = bi.reconstruct(&x, &t1, &t2).unwrap();
        let err = (r.value - exact).abs();
        if let Some((e0, est0)) = prev {
            assert!(err <= e0 + est0, "rel={rel}: {err} after {e0}");
        }
        prev = Some((err, r.quad_error));
    }
}

#[test]
fn higher_modes_and_both_coefficients() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-13, 1e-9)).unwrap();
    // n = 2 grows like exp(2 |y1|), past the kernel's comfortable range but
    // still summable against exp(-a1 ch(rho1 t))
    let (m, t1, t2) = strip_traces(2, 0.3, 0.2);
    let x = Point2::new(0.4, 1.1);
    let r = bi.reconstruct(&x, &t1, &t2).unwrap();
    assert!(r.growth_warning);
    assert_relative_eq!(r.value, m.eval_u(&x), max_relative = 1e-6);
}

#[test]
fn tabulated_traces_reproduce_analytic_ones() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let q = QuadratureConfig::new(1e-12, 1e-8);
    let bi = BoundaryIntegrator::new(&d, &p, q).unwrap();
    let (m, t1, t2) = strip_traces(1, 1.0, 0.0);
    let xs: Vec<f64> = (0..=1600).map(|i| -20.0 + 0.025 * i as f64).collect();
    let table = |t: &CauchyTrace| {
        let ys = xs.iter().map(|&y1| t.value(&d, y1)).collect();
        CauchyTrace::tabulated(t.curve, MonotoneCubic::new(xs.clone(), ys).unwrap(), 1.0)
    };
    let x = Point2::new(0.5, 1.0);
    let r = bi.reconstruct(&x, &table(&t1), &table(&t2)).unwrap();
    assert_relative_eq!(r.value, m.eval_u(&x), max_relative = 1e-4);
}

#[test]
fn curved_domain_interior_and_exterior() {
    let p = kernel();
    let d = bumpy(p.h());
    let f = HarmonicFn::parse("im_exp:lambda=0.3", 1.0).unwrap();
    let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-12, 1e-8)).unwrap();
    for i in 0..10 {
        let x1 = -3.0 + 0.65 * i as f64;
        let (lo, hi) = (d.curve(CurveKind::Lower).f(x1), d.curve(CurveKind::Upper).f(x1));
        let inside = Point2::new(x1, lo + (0.15 + 0.07 * i as f64) * (hi - lo));
        let outside = Point2::new(x1, if i % 2 == 0 { lo - 0.5 } else { hi + 0.5 });
        let gi = bi.green_identity_value(&inside, &f).unwrap();
        let go = bi.green_identity_value(&outside, &f).unwrap();
        assert_eq!(gi.classification, PointClass::Inside);
        assert_eq!(go.classification, PointClass::Outside);
        assert!((gi.value - f.eval_u(&inside)).abs() <= gi.error_estimate.max(1e-10), "{inside:?}");
        assert!(go.value.abs() <= go.error_estimate.max(1e-10), "{outside:?}");
    }
}

#[test]
fn near_boundary_points_are_flagged_not_rejected() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let f = HarmonicFn::parse("re_exp:lambda=0.4", 1.0).unwrap();
    let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-12, 1e-8)).unwrap();
    let g = bi.green_identity_value(&Point2::new(0.0, 2e-3), &f).unwrap();
    assert_eq!(g.classification, PointClass::NearBoundary);
    assert!(g.value.is_finite());
}

#[test]
fn domain_outside_decay_window_rejected() {
    // rho1 close to rho shrinks the window below the band
    let p = KernelParams::new(1.0, 3.0, 0.9).unwrap();
    let lower = BoundaryCurve::new(CurveKind::Lower, "sinusoid:c1=0.5".parse().unwrap()).unwrap();
    let upper = BoundaryCurve::new(CurveKind::Upper, format!("flat:level={}", PI).parse().unwrap()).unwrap();
    let d = BandDomain::new(lower, upper, PI).unwrap();
    let (lo, hi) = p.decay_window();
    assert!(lo > -0.5 || hi < PI, "window ({lo}, {hi})");
    assert!(matches!(BoundaryIntegrator::new(&d, &p, QuadratureConfig::default()), Err(Error::Config(_))));
}

#[test]
fn batch_preserves_order_and_row_errors() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-12, 1e-8)).unwrap();
    let (m, t1, t2) = strip_traces(1, 1.0, 0.0);
    let pts = [Point2::new(0.0, 1.0), Point2::new(0.0, -1.0), Point2::new(1.5, 2.0)];
    let out = bi.reconstruct_batch(&pts, &t1, &t2);
    assert_relative_eq!(out[0].as_ref().unwrap().value, m.eval_u(&pts[0]), max_relative = 1e-7);
    assert!(matches!(out[1], Err(Error::Classification { .. })));
    assert_relative_eq!(out[2].as_ref().unwrap().value, m.eval_u(&pts[2]), max_relative = 1e-7);
}

#[test]
fn bounded_trace_gives_bounded_integrals() {
    let p = kernel();
    let d = BandDomain::straight_strip(p.h()).unwrap();
    let bi = BoundaryIntegrator::new(&d, &p, QuadratureConfig::new(1e-12, 1e-8)).unwrap();
    let t = CauchyTrace::exp_growth(CurveKind::Upper, 2.0, 0.0);
    let xs: Vec<f64> = (0..=6).map(|i| i as f64).collect();
    let cert = bi.growth_certificate(&t, &xs).unwrap();
    assert!(cert.fitted_rate <= 1e-8);
    let spread = cert.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
        - cert.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    assert!(spread.abs() < 1e-8);

    let zero = bi.growth_certificate(&CauchyTrace::zero(CurveKind::Lower), &xs).unwrap();
    assert_eq!((zero.fitted_rate, zero.constant), (0.0, 0.0));
    assert!(zero.samples.iter().all(|s| s.1 == 0.0));
}
