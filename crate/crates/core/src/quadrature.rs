//! Weighted integration over the real line outside the weight gap.
//!
//! Integrals over `R` are folded onto `(eps, inf)` as `h(x) + h(-x)` and
//! computed on a truncation schedule `K = k0, 2 k0, 4 k0, ...`. Each dyadic
//! panel is integrated by adaptive Gauss-Legendre. The increments
//! `I(2K) - I(K)` drive a tail classifier: an integrand behaving like
//! `C x^p` produces increments growing like `K^(p+1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::model_space::{ModelWeight, Support, TestFunction, Weight};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {x}")]
    NonFiniteEvaluation { x: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial truncation radius; must exceed the weight gap.
    pub k0: f64,
    pub doublings: usize,
    pub nodes_per_panel: usize,
    /// Half-width of the band around exponent -1 that separates the
    /// convergent and divergent tail classes.
    pub exponent_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            k0: 2.0,
            doublings: 64,
            nodes_per_panel: 10,
            exponent_margin: 0.1,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let bad = |m: &str| Err(QuadratureError::InvalidConfig(m.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return bad("k0 must be positive");
        }
        if self.doublings < 4 {
            return bad("at least 4 doublings are required");
        }
        if self.nodes_per_panel < 8 {
            return bad("at least 8 nodes per panel are required");
        }
        if !(self.exponent_margin > 0.0 && self.exponent_margin < 0.5) {
            return bad("exponent margin must lie in (0, 0.5)");
        }
        Ok(())
    }

    fn tolerance(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Diverged,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub status: Status,
    /// Fitted (or known) `p` in `|integrand| ~ C x^p`.
    pub tail_exponent: Option<f64>,
}

impl IntegrationResult {
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            abs_error_estimate: 0.0,
            status: Status::Converged,
            tail_exponent: None,
        }
    }

    /// Sum of several results. The status is the weakest of the parts.
    pub fn combine(parts: &[(Complex64, &IntegrationResult)]) -> Self {
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut status = Status::Converged;
        let mut tail: Option<f64> = None;
        for (c, r) in parts {
            value += c * r.value;
            err += c.norm() * r.abs_error_estimate;
            status = match (status, r.status) {
                (Status::Diverged, _) | (_, Status::Diverged) => Status::Diverged,
                (Status::Indeterminate, _) | (_, Status::Indeterminate) => Status::Indeterminate,
                _ => Status::Converged,
            };
            if let Some(p) = r.tail_exponent {
                tail = Some(tail.map_or(p, |q| q.max(p)));
            }
        }
        Self {
            value,
            abs_error_estimate: err,
            status,
            tail_exponent: tail,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Plain rule on `[a, b]`.
    pub fn integrate<F>(&self, f: &F, a: f64, b: f64) -> Result<Complex64, QuadratureError>
    where
        F: Fn(f64) -> Complex64 + ?Sized,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let x = c + h * t;
            let v = f(x);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(QuadratureError::NonFiniteEvaluation { x });
            }
            acc += *w * v;
        }
        Ok(acc * h)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const MAX_BISECTIONS: usize = 40;

/// Adaptive bisection on `[a, b]`; returns `(value, error estimate)`.
fn adaptive_panel<F>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: Complex64,
    cfg: &QuadratureConfig,
    depth: usize,
) -> Result<(Complex64, f64), QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m)?;
    let right = rule.integrate(f, m, b)?;
    let halves = left + right;
    let err = (halves - whole).norm();
    let tol = (0.1 * cfg.abs_tol).max(cfg.rel_tol * 0.1 * halves.norm());
    if err <= tol || depth >= MAX_BISECTIONS || m <= a || m >= b {
        return Ok((halves, err));
    }
    let (lv, le) = adaptive_panel(f, rule, a, m, left, cfg, depth + 1)?;
    let (rv, re) = adaptive_panel(f, rule, m, b, right, cfg, depth + 1)?;
    Ok((lv + rv, le + re))
}

/// Integral over `[a, b]` with panel edges forced at `hints` inside the interval.
pub fn integrate_interval<F>(
    f: &F,
    a: f64,
    b: f64,
    hints: &[f64],
    rule: &GaussLegendre,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut edges = vec![a];
    edges.extend(hints.iter().copied().filter(|&h| h > a && h < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in edges.windows(2) {
        let whole = rule.integrate(f, w[0], w[1])?;
        let (v, e) = adaptive_panel(f, rule, w[0], w[1], whole, cfg, 0)?;
        value += v;
        err += e;
    }
    Ok((value, err))
}

/// Least-squares slope of `log|increment|` against `log k`, shifted by -1.
///
/// `samples` are `(k, partial integral up to k)` on a geometric schedule.
/// A vanishing final increment yields `-inf`.
pub fn estimate_tail_exponent(samples: &[(f64, f64)]) -> Result<f64, QuadratureError> {
    if samples.len() < 3 {
        return Err(QuadratureError::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(QuadratureError::InvalidConfig(
            "sample radii must be strictly increasing".into(),
        ));
    }
    let ks: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let incs: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).abs())
        .collect();
    Ok(fit_increment_exponent(&ks[..incs.len()], &incs))
}

fn fit_increment_exponent(ks: &[f64], incs: &[f64]) -> f64 {
    if incs.last().is_none_or(|&d| d == 0.0) {
        return f64::NEG_INFINITY;
    }
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(incs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&k, &d)| (k.ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    least_squares_slope(&pts) - 1.0
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Fit window (in increments) for the tail exponent.
const FIT_WINDOW: usize = 3;

/// `int_start^inf h(x) dx` on the doubling schedule with tail classification.
///
/// `known_exponent`, when given, replaces the fitted exponent of `|h|`.
/// The integrand must not change sign in a way that makes the magnitude
/// exponent misleading; callers only pass it for `|f|^2 w` integrands.
pub fn integrate_half_line<F>(
    h: &F,
    start: f64,
    hints: &[f64],
    known_exponent: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    cfg.validate()?;
    if cfg.k0 <= start {
        return Err(QuadratureError::InvalidConfig(format!(
            "k0 = {} must exceed the lower limit {start}",
            cfg.k0
        )));
    }
    let rule = GaussLegendre::new(cfg.nodes_per_panel);
    let margin = cfg.exponent_margin;

    // Dyadic panels from `start` up to `k0`.
    let mut value = Complex64::new(0.0, 0.0);
    let mut quad_err = 0.0;
    let mut a = start;
    while a < cfg.k0 {
        let b = (2.0 * a).min(cfg.k0);
        let (v, e) = integrate_interval(h, a, b, hints, &rule, cfg)?;
        value += v;
        quad_err += e;
        a = b;
    }

    let mut radii = vec![cfg.k0];
    let mut incs: Vec<Complex64> = Vec::new();
    let mut extrapolated: Vec<Complex64> = Vec::new();
    let mut fitted: Option<f64> = None;
    let mut band_fits = 0usize;
    let mut divergent_fits = 0usize;
    // Quiet stretches before the last breakpoint prove nothing.
    let last_hint = hints.iter().copied().fold(start, f64::max);

    for _ in 0..cfg.doublings {
        let lo = *radii.last().expect("schedule starts at k0");
        let hi = 2.0 * lo;
        let (inc, e) = integrate_interval(h, lo, hi, hints, &rule, cfg)?;
        value += inc;
        quad_err += e;
        incs.push(inc);
        radii.push(hi);
        let tol = cfg.tolerance(value);

        let n = incs.len();
        if n >= 2 && lo >= last_hint && incs[n - 1].norm() <= tol && incs[n - 2].norm() <= tol {
            return Ok(IntegrationResult {
                value,
                abs_error_estimate: quad_err + incs[n - 1].norm(),
                status: Status::Converged,
                tail_exponent: fitted,
            });
        }

        let p = match known_exponent {
            Some(p) => p,
            None if n >= FIT_WINDOW => {
                let mags: Vec<f64> = incs[n - FIT_WINDOW..].iter().map(|d| d.norm()).collect();
                fit_increment_exponent(&radii[n - FIT_WINDOW..n], &mags)
            }
            None => continue,
        };
        fitted = Some(p);

        if p <= -1.0 - margin {
            // Geometric tail: increments shrink by rho = 2^(p+1) per doubling.
            let rho = 2f64.powf(p + 1.0);
            let tail = inc * (rho / (1.0 - rho));
            extrapolated.push(value + tail);
            band_fits = 0;
            divergent_fits = 0;
            if let [.., prev, last] = extrapolated.as_slice() {
                let err = quad_err + (last - prev).norm();
                if err <= cfg.tolerance(*last) {
                    return Ok(IntegrationResult {
                        value: *last,
                        abs_error_estimate: err,
                        status: Status::Converged,
                        tail_exponent: Some(p),
                    });
                }
            }
            continue;
        }
        extrapolated.clear();
        if inc.norm() <= tol {
            continue;
        }
        if p >= -1.0 + margin {
            divergent_fits += 1;
            band_fits = 0;
            if divergent_fits >= 2 || known_exponent.is_some() {
                return Ok(IntegrationResult {
                    value,
                    abs_error_estimate: quad_err,
                    status: Status::Diverged,
                    tail_exponent: Some(p),
                });
            }
        } else {
            band_fits += 1;
            divergent_fits = 0;
            // Logarithmic divergence: increments stay comparable to C ln 2.
            if known_exponent.is_some() && band_fits >= 2 {
                return Ok(IntegrationResult {
                    value,
                    abs_error_estimate: quad_err,
                    status: Status::Diverged,
                    tail_exponent: Some(p),
                });
            }
        }
    }

    // Budget exhausted. A persistent exponent inside the band with
    // non-negligible increments is the logarithmic (boundary) class.
    let status = if band_fits >= 2 {
        Status::Diverged
    } else {
        Status::Indeterminate
    };
    Ok(IntegrationResult {
        value: extrapolated.last().copied().unwrap_or(value),
        abs_error_estimate: quad_err + incs.last().map_or(0.0, |d| d.norm()),
        status,
        tail_exponent: fitted,
    })
}

/// `int_start^bound h dx` on dyadic panels; no tail to classify.
fn integrate_compact<F>(
    h: &F,
    start: f64,
    bound: f64,
    hints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    cfg.validate()?;
    if bound <= start {
        return Ok(IntegrationResult::exact(Complex64::new(0.0, 0.0)));
    }
    let rule = GaussLegendre::new(cfg.nodes_per_panel);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut a = start;
    while a < bound {
        let b = (2.0 * a).min(bound);
        let (v, e) = integrate_interval(h, a, b, hints, &rule, cfg)?;
        value += v;
        err += e;
        a = b;
    }
    Ok(IntegrationResult {
        value,
        abs_error_estimate: err,
        status: Status::Converged,
        tail_exponent: None,
    })
}

fn folded_hints(f: &TestFunction, g: &TestFunction, eps: f64) -> Vec<f64> {
    let mut hints: Vec<f64> = f
        .breakpoints()
        .iter()
        .chain(g.breakpoints())
        .map(|x| x.abs())
        .filter(|&x| x > eps)
        .collect();
    for s in [f.support(), g.support()] {
        if let Support::Compact(k) = s {
            hints.push(k);
        }
    }
    hints.sort_by(f64::total_cmp);
    hints.dedup();
    hints
}

fn effective_config(cfg: &QuadratureConfig, eps: f64) -> QuadratureConfig {
    let mut c = *cfg;
    if c.k0 <= eps {
        c.k0 = 2.0 * eps;
    }
    c
}

/// `int_R f conj(g) w dx` for a weight vanishing on `[-eps, eps]`.
pub fn integrate_weighted<W: Weight + ?Sized>(
    f: &TestFunction,
    g: &TestFunction,
    w: &W,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError> {
    folded_integral(f, g, w, None, cfg)
}

/// `int_R |f|^2 w dx`, optionally letting the tail metadata of `f` and `w`
/// decide the tail class.
pub fn integrate_norm_squared<W: Weight + ?Sized>(
    f: &TestFunction,
    w: &W,
    use_metadata: bool,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError> {
    let known = if use_metadata && f.support() == Support::Full {
        match (f.tail_exponent(), w.tail_exponent()) {
            (Some(p), Some(q)) => Some(2.0 * p + q),
            _ => None,
        }
    } else {
        None
    };
    folded_integral(f, f, w, known, cfg)
}

fn folded_integral<W: Weight + ?Sized>(
    f: &TestFunction,
    g: &TestFunction,
    w: &W,
    known_exponent: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError> {
    let eps = w.epsilon();
    let hints = folded_hints(f, g, eps);
    let bound = [f.support(), g.support()]
        .iter()
        .filter_map(|s| s.bound())
        .fold(f64::INFINITY, f64::min);
    let h = |x: f64| {
        let (wp, wm) = (w.eval(x), w.eval(-x));
        let mut acc = Complex64::new(0.0, 0.0);
        if wp != 0.0 {
            acc += f.eval(x) * g.eval(x).conj() * wp;
        }
        if wm != 0.0 {
            acc += f.eval(-x) * g.eval(-x).conj() * wm;
        }
        acc
    };
    if bound.is_finite() {
        return integrate_compact(&h, eps, bound, &hints, cfg);
    }
    integrate_half_line(&h, eps, &hints, known_exponent, &effective_config(cfg, eps))
}

/// `lim_k int_{-k}^{k} f conj(g) r dx` for the signed weight `r`.
pub fn symmetric_principal_limit(
    f: &TestFunction,
    g: &TestFunction,
    r: &ModelWeight,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult, QuadratureError> {
    folded_integral(f, g, r, None, cfg)
}
