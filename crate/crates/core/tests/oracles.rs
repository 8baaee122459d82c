//! Closed-form reference values, computed independently of the library.

use std::f64::consts::E;

use kcl_core::eigenspectral::{
    divergence_witness, estimate_projection_norm, g0_eta_constant, GridSpec, SpectralInterval,
};
use kcl_core::forms::{FormContext, InnerProductKind};
use kcl_core::model_space::{make_f_tau, Alpha, ModelWeight};
use kcl_core::quadrature::{QuadratureConfig, Status};
use kcl_core::sturm_liouville::{eval_p, eval_u0, u0_dom_t_integral};

// int_1^inf (sqrt(x^2+1) - x) dx by mpmath, 30 digits
const C2: f64 = 0.934_320_049_292_896;

fn ctx() -> FormContext {
    FormContext::default()
}

fn a(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

#[test]
fn eta_constant_scales_inversely_with_alpha() {
    for alpha in [0.5, 1.0, 2.0] {
        let c = g0_eta_constant(a(alpha), &ctx()).unwrap();
        let expected = 2.0 * C2 / alpha;
        assert!(
            (c - expected).abs() <= 1e-9 * expected,
            "alpha={alpha}: {c} vs {expected}"
        );
    }
}

#[test]
fn f1_omega_half_norm() {
    let ctx = ctx();
    let f1 = make_f_tau(1.0, &ctx.weight).unwrap();
    let v = ctx
        .inner_product(InnerProductKind::Omega(a(0.5)), &f1, &f1)
        .unwrap();
    assert_eq!(v.diagnostics.status, Status::Converged);
    // 2 int_1^inf x^{1/4} x^{-5/4}... folded: 2 int_1^inf x^{-5/4} dx = 8
    assert!((v.value.re - 8.0).abs() < 1e-8, "{}", v.value);
}

#[test]
fn odd_term_closed_form() {
    for alpha in [0.5, 1.0, 2.0] {
        for k in [4.0, 16.0, 64.0, 256.0f64] {
            let w = divergence_witness(a(alpha), k, &ctx()).unwrap();
            let expected = 2.0 / alpha * (k.powf(alpha / 2.0) - 1.0);
            assert!((w.odd_term - expected).abs() <= 1e-6 * expected);
        }
    }
}

#[test]
fn projection_norm_alpha_zero_is_sqrt2() {
    // pointwise generalized ratio |x|^alpha + 1 on the mirror-pair blocks
    for k in [4.0, 64.0] {
        let e = estimate_projection_norm(
            &SpectralInterval::left_open(1.0, k),
            a(0.0),
            &GridSpec::default(),
            &ctx(),
        )
        .unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-8, "{}", e.value);
    }
}

#[test]
fn sturm_liouville_coefficient_values() {
    assert!((eval_p(0.2).unwrap() - 0.833_782_312_857_130_5).abs() < 1e-14);
    assert!((eval_p(0.5).unwrap() - 1.0 / E).abs() < 1e-15);
    assert!((eval_p(-1.0).unwrap() + 0.021_258_169_615_34).abs() < 1e-13);
    assert_eq!(eval_u0(-1.0).unwrap(), 0.0);
    assert_eq!(eval_u0(0.0).unwrap(), 0.0);
    assert!((eval_u0(1.0 / E).unwrap() - 8.0 / 9.0).abs() < 1e-15);
    assert!(eval_u0(1.0).unwrap().abs() < 1e-15);
}

#[test]
fn u0_energy_integral() {
    let r = u0_dom_t_integral(&QuadratureConfig::default()).unwrap();
    assert_eq!(r.status, Status::Converged);
    let expected = 4.0 + 64.0 / (81.0 * (E - 1.0));
    assert!((r.value.re - expected).abs() < 1e-7, "{}", r.value.re);
}

#[test]
fn weights_default_model() {
    let w = ModelWeight::default();
    assert_eq!(kcl_core::model_space::Weight::eval(&w, 0.5), 0.0);
    assert_eq!(kcl_core::model_space::Weight::eval(&w, -3.0), -1.0);
}
