//! Inner products of the weighted spaces, the closures `t_alpha(.,.)` and
//! `t_alpha[.,.]`, and the operators `Q_alpha`, `S_alpha = J_alpha`, `P_alpha^{+-}`.
//!
//! ```text
//! t_alpha(f, g) = 2 (f_o, g_o)_{omega_alpha} + (f, g)_{eta_alpha}
//! t_alpha[f, g] = lim_k int_{-k}^{k} f conj(g) r dx
//! (Q_alpha f)(x) = sqrt(|x|^alpha + 1) f(x) - sqrt(|x|^alpha) f(-x)
//! (S_alpha f)(x) = sgn(x) (Q_alpha f)(x)
//! ```
//!
//! `S_alpha`, `J_alpha` and `P_alpha^{+-}` act on compactly supported
//! functions only.

use num_complex::Complex64;
use thiserror::Error;

use crate::model_space::{odd_part, Alpha, ModelWeight, Parity, Support, TestFunction, WeightKind};
use crate::quadrature::{
    integrate_weighted, symmetric_principal_limit, IntegrationResult, QuadratureConfig,
    QuadratureError, Status,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("operator is only defined on compactly supported functions")]
    UnsupportedDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerProductKind {
    /// `(.,.)_{r_-}`
    RMinus,
    /// `(.,.)_{r_+}`
    RPlus,
    /// `(.,.)_r`, weight `|r|`
    AbsR,
    /// `[.,.]_r`, signed weight, symmetric principal limit
    IndefiniteR,
    Eta(Alpha),
    Omega(Alpha),
}

impl InnerProductKind {
    pub fn is_definite(self) -> bool {
        !matches!(self, InnerProductKind::IndefiniteR)
    }

    fn weight_kind(self) -> Option<WeightKind> {
        match self {
            InnerProductKind::RMinus => Some(WeightKind::RMinus),
            InnerProductKind::RPlus => Some(WeightKind::RPlus),
            InnerProductKind::AbsR => Some(WeightKind::AbsR),
            InnerProductKind::IndefiniteR => None,
            InnerProductKind::Eta(a) => Some(WeightKind::Eta(a)),
            InnerProductKind::Omega(a) => Some(WeightKind::Omega(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductValue {
    pub value: Complex64,
    pub diagnostics: IntegrationResult,
}

impl InnerProductValue {
    fn from_result(diagnostics: IntegrationResult) -> Self {
        Self {
            value: diagnostics.value,
            diagnostics,
        }
    }

    pub fn is_trusted(&self) -> bool {
        self.diagnostics.status == Status::Converged
    }

    pub fn error_estimate(&self) -> f64 {
        self.diagnostics.abs_error_estimate
    }
}

/// A weight and a quadrature configuration; all forms are evaluated against these.
#[derive(Debug, Clone, Default)]
pub struct FormContext {
    pub weight: ModelWeight,
    pub cfg: QuadratureConfig,
}


impl FormContext {
    pub fn new(weight: ModelWeight, cfg: QuadratureConfig) -> Self {
        Self { weight, cfg }
    }

    pub fn inner_product(
        &self,
        kind: InnerProductKind,
        f: &TestFunction,
        g: &TestFunction,
    ) -> Result<InnerProductValue, FormError> {
        let res = match kind.weight_kind() {
            Some(wk) => integrate_weighted(f, g, &self.weight.derived(wk), &self.cfg)?,
            None => symmetric_principal_limit(f, g, &self.weight, &self.cfg)?,
        };
        Ok(InnerProductValue::from_result(res))
    }

    /// Hilbert inner product `2 (f_o, g_o)_{omega_alpha} + (f, g)_{eta_alpha}`.
    pub fn t_alpha_pos(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        alpha: Alpha,
    ) -> Result<InnerProductValue, FormError> {
        let odd = self.odd_part_term(f, g, alpha)?;
        let eta = self.inner_product(InnerProductKind::Eta(alpha), f, g)?;
        let two = Complex64::new(2.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Ok(InnerProductValue::from_result(IntegrationResult::combine(
            &[(two, &odd.diagnostics), (one, &eta.diagnostics)],
        )))
    }

    /// `(f_o, g_o)_{omega_alpha}`; the factor 2 of `t_alpha` is not applied.
    pub fn odd_part_term(
        &self,
        f: &TestFunction,
        g: &TestFunction,
        alpha: Alpha,
    ) -> Result<InnerProductValue, FormError> {
        let (fo, go) = (odd_part(f), odd_part(g));
        self.inner_product(InnerProductKind::Omega(alpha), &fo, &go)
    }

    /// Krein inner product `t_alpha[f, g]` as a symmetric principal limit.
    /// Identical for every `alpha` on the domain where it exists.
    pub fn t_alpha_indef(
        &self,
        f: &TestFunction,
        g: &TestFunction,
    ) -> Result<InnerProductValue, FormError> {
        self.inner_product(InnerProductKind::IndefiniteR, f, g)
    }
}

fn sqrt_pow(x: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else {
        x.abs().powf(0.5 * alpha)
    }
}

/// `(Q_alpha f)(x) = sqrt(|x|^alpha + 1) f(x) - sqrt(|x|^alpha) f(-x)`.
pub fn apply_q_alpha(f: &TestFunction, alpha: Alpha) -> TestFunction {
    let a = alpha.value();
    let inner = f.clone();
    let rule = move |x: f64| {
        let s = sqrt_pow(x, a);
        let s1 = (s * s + 1.0).sqrt();
        s1 * inner.eval(x) - s * inner.eval(-x)
    };
    // Even input scales by (sqrt(t+1) - sqrt t) ~ |x|^(-alpha/2)/2,
    // odd input by (sqrt(t+1) + sqrt t) ~ 2 |x|^(alpha/2).
    let tail = match (f.parity(), f.tail_exponent()) {
        (Parity::Even, Some(p)) if a > 0.0 => Some(p - 0.5 * a),
        (Parity::Even, Some(p)) => Some(p),
        (Parity::Odd, Some(p)) => Some(p + 0.5 * a),
        _ => None,
    };
    TestFunction::new(rule)
        .with_parity(f.parity())
        .with_support(f.support())
        .with_tail_exponent(tail)
        .with_breakpoints(f.symmetric_breakpoints())
}

/// `(S_alpha f)(x) = sgn(x) (Q_alpha f)(x)` on compactly supported `f`.
pub fn apply_s_alpha(f: &TestFunction, alpha: Alpha) -> Result<TestFunction, FormError> {
    if f.support() == Support::Full {
        return Err(FormError::UnsupportedDomain);
    }
    let q = apply_q_alpha(f, alpha);
    let rule = move |x: f64| {
        if x > 0.0 {
            q.eval(x)
        } else if x < 0.0 {
            -q.eval(x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let parity = match f.parity() {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::None => Parity::None,
    };
    Ok(TestFunction::new(rule)
        .with_parity(parity)
        .with_support(f.support())
        .with_breakpoints(f.symmetric_breakpoints()))
}

/// Fundamental symmetry of `t_alpha` on compactly supported functions.
pub fn apply_j_alpha(f: &TestFunction, alpha: Alpha) -> Result<TestFunction, FormError> {
    apply_s_alpha(f, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `P_alpha^{+-} f = (f +- S_alpha f) / 2`.
pub fn project_pm(f: &TestFunction, alpha: Alpha, sign: Sign) -> Result<TestFunction, FormError> {
    let s = apply_s_alpha(f, alpha)?;
    let half = Complex64::new(0.5, 0.0);
    let combined = match sign {
        Sign::Plus => f.add(&s),
        Sign::Minus => f.sub(&s),
    };
    Ok(combined.scale(half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::{make_f_tau, make_g_tau, truncate};

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    fn close(x: Complex64, y: f64, tol: f64) -> bool {
        (x - Complex64::new(y, 0.0)).norm() <= tol
    }

    #[test]
    fn indefinite_g0_vanishes() {
        let ctx = FormContext::default();
        let g0 = make_g_tau(0.0, &ctx.weight).unwrap();
        let v = ctx
            .inner_product(InnerProductKind::IndefiniteR, &g0, &g0)
            .unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
        assert!(v.is_trusted());
    }

    #[test]
    fn definite_examples() {
        let ctx = FormContext::default();
        let g0 = make_g_tau(0.0, &ctx.weight).unwrap();
        let v = ctx
            .inner_product(InnerProductKind::Eta(a(2.0)), &g0, &g0)
            .unwrap();
        assert!(close(v.value, 0.934_320_049_292_896, 1e-9));
        let f1 = make_f_tau(1.0, &ctx.weight).unwrap();
        let v = ctx
            .inner_product(InnerProductKind::Omega(a(0.5)), &f1, &f1)
            .unwrap();
        assert!(close(v.value, 8.0, 1e-8));
    }

    #[test]
    fn t_alpha_pos_of_even_is_eta_product() {
        let ctx = FormContext::default();
        let f = truncate(&make_g_tau(0.5, &ctx.weight).unwrap(), 6.0);
        for al in [0.0, 1.0, 2.0] {
            let t = ctx.t_alpha_pos(&f, &f, a(al)).unwrap();
            let e = ctx
                .inner_product(InnerProductKind::Eta(a(al)), &f, &f)
                .unwrap();
            assert_eq!(t.value, e.value);
        }
    }

    #[test]
    fn t_alpha_pos_of_indicator() {
        let ctx = FormContext::default();
        let chi = TestFunction::indicator(1.0, 2.0);
        let t = ctx.t_alpha_pos(&chi, &chi, a(0.0)).unwrap();
        assert!(close(t.value, 2f64.sqrt(), 1e-12), "{:?}", t.value);
    }

    #[test]
    fn odd_term_of_right_truncation() {
        let ctx = FormContext::default();
        let g0 = make_g_tau(0.0, &ctx.weight).unwrap();
        let gk = g0.restrict(|x| x > 1.0 && x <= 4.0, Support::Compact(4.0), &[1.0, 4.0]);
        let odd = ctx.odd_part_term(&gk, &gk, a(2.0)).unwrap();
        assert!(close(2.0 * odd.value, 3.0, 1e-10), "{:?}", odd.value);
    }

    #[test]
    fn q_alpha_pointwise() {
        let chi = TestFunction::indicator(1.0, 2.0);
        let q = apply_q_alpha(&chi, a(0.0));
        assert!(close(q.eval(1.5), 2f64.sqrt(), 1e-15));
        assert!(close(q.eval(-1.5), -1.0, 1e-15));
        let s = apply_s_alpha(&chi, a(0.0)).unwrap();
        assert!(close(s.eval(-1.5), 1.0, 1e-15));
        let g = make_g_tau(0.0, &ModelWeight::default()).unwrap();
        let qg = apply_q_alpha(&g, a(1.0));
        let x: f64 = 3.0;
        let expect = ((x + 1.0).sqrt() - x.sqrt()) * g.eval(x).re;
        assert!(close(qg.eval(x), expect, 1e-15));
    }

    #[test]
    fn s_alpha_rejects_full_support() {
        let g0 = make_g_tau(0.0, &ModelWeight::default()).unwrap();
        assert_eq!(
            apply_s_alpha(&g0, a(1.0)).unwrap_err(),
            FormError::UnsupportedDomain
        );
        assert!(project_pm(&g0, a(1.0), Sign::Plus).is_err());
        let z = apply_s_alpha(&TestFunction::zero(), a(1.5)).unwrap();
        assert_eq!(z.eval(2.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn s_alpha_is_an_involution() {
        let f = TestFunction::piecewise_constant(&[
            (1.0, 2.0, Complex64::new(1.0, 0.0)),
            (-3.0, -2.0, Complex64::new(-2.0, 0.0)),
        ]);
        for al in [0.0, 0.5, 1.0, 2.0] {
            let s = apply_s_alpha(&f, a(al)).unwrap();
            let ss = apply_s_alpha(&s, a(al)).unwrap();
            for i in 0..20 {
                let x = -3.5 + 0.37 * i as f64;
                if x == 0.0 {
                    continue;
                }
                let err = (ss.eval(x) - f.eval(x)).norm();
                assert!(
                    err <= 1e-12 * (1.0 + x.abs().powf(al)),
                    "alpha {al} x {x} err {err}"
                );
            }
        }
    }

    #[test]
    fn projections_split_and_orthogonal() {
        let ctx = FormContext::default();
        let f = TestFunction::indicator(1.0, 3.0);
        let al = a(1.0);
        let p = project_pm(&f, al, Sign::Plus).unwrap();
        let m = project_pm(&f, al, Sign::Minus).unwrap();
        for i in 0..20 {
            let x = -3.2 + 0.33 * i as f64;
            assert!((p.eval(x) + m.eval(x) - f.eval(x)).norm() < 1e-15);
        }
        let cross = ctx.t_alpha_pos(&p, &m, al).unwrap();
        assert!(cross.value.norm() < 1e-9, "{:?}", cross.value);
        let pp = ctx.t_alpha_pos(&p, &p, al).unwrap().value;
        let pi = ctx.t_alpha_indef(&p, &p).unwrap().value;
        assert!((pp - pi).norm() < 1e-9 * pp.norm().max(1.0));
        let mm = ctx.t_alpha_pos(&m, &m, al).unwrap().value;
        let mi = ctx.t_alpha_indef(&m, &m).unwrap().value;
        assert!((mm + mi).norm() < 1e-9 * mm.norm().max(1.0));
        // idempotent
        let pp_f = project_pm(&p, al, Sign::Plus).unwrap();
        for x in [-2.5, -1.2, 1.7, 2.9] {
            assert!((pp_f.eval(x) - p.eval(x)).norm() < 1e-13);
        }
    }
}
