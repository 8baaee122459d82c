//! The eigenspectral function `E(Delta) f = chi_Delta f` of the model
//! multiplication operator, Ritz estimates of `||E_alpha(Delta)||_alpha`
//! and the classification of the critical point at infinity.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::forms::{FormContext, FormError};
use crate::model_space::{
    make_g_tau, truncate, Alpha, ModelError, Support, TestFunction, Weight, WeightKind,
};
use crate::quadrature::{integrate_norm_squared, least_squares_slope, QuadratureError, Status};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("Gram matrix is numerically singular: {0}")]
    SingularGram(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid k schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Endpoints of a bounded interval; each end open or closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Bounds {
    fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

/// Element of the semiring of bounded intervals and their complements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralInterval {
    Empty,
    Real,
    Bounded(Bounds),
    Complement(Bounds),
}

impl SpectralInterval {
    pub fn bounded(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        let b = Bounds {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        if b.is_empty() {
            SpectralInterval::Empty
        } else {
            SpectralInterval::Bounded(b)
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::bounded(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::bounded(lo, hi, true, true)
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self::bounded(lo, hi, false, true)
    }

    pub fn complement_of(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        match Self::bounded(lo, hi, lo_closed, hi_closed) {
            SpectralInterval::Bounded(b) => SpectralInterval::Complement(b),
            _ => SpectralInterval::Real,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            SpectralInterval::Empty => false,
            SpectralInterval::Real => true,
            SpectralInterval::Bounded(b) => b.contains(x),
            SpectralInterval::Complement(b) => !b.contains(x),
        }
    }

    /// Finite endpoints.
    pub fn endpoints(&self) -> Vec<f64> {
        match self {
            SpectralInterval::Bounded(b) | SpectralInterval::Complement(b) => vec![b.lo, b.hi],
            _ => Vec::new(),
        }
    }

    /// `sup |Delta|`, infinite for complements and the whole line.
    pub fn sup_abs(&self) -> f64 {
        match self {
            SpectralInterval::Empty => 0.0,
            SpectralInterval::Bounded(b) => b.lo.abs().max(b.hi.abs()),
            _ => f64::INFINITY,
        }
    }

    /// Intersection, when it is again an element of the semiring.
    pub fn intersect(&self, other: &SpectralInterval) -> Option<SpectralInterval> {
        use SpectralInterval::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => Some(Empty),
            (Real, x) | (x, Real) => Some(*x),
            (Bounded(a), Bounded(b)) => Some(intersect_bounds(a, b)),
            (Bounded(a), Complement(c)) | (Complement(c), Bounded(a)) => {
                // Representable only if the hole does not split `a`.
                let (left, right) = (a.lo, a.hi);
                let hole_inside = c.lo > left && c.hi < right;
                if !(c.lo <= right && c.hi >= left) {
                    Some(Bounded(*a))
                } else if hole_inside {
                    None
                } else if c.lo <= left && c.hi >= right {
                    let covered = (c.lo < left || (c.lo == left && (c.lo_closed || !a.lo_closed)))
                        && (c.hi > right || (c.hi == right && (c.hi_closed || !a.hi_closed)));
                    if covered {
                        Some(Empty)
                    } else {
                        None
                    }
                } else if c.lo <= left {
                    Some(Self::bounded(c.hi, a.hi, !c.hi_closed, a.hi_closed))
                } else {
                    Some(Self::bounded(a.lo, c.lo, a.lo_closed, !c.lo_closed))
                }
            }
            (Complement(_), Complement(_)) => None,
        }
    }
}

fn intersect_bounds(a: &Bounds, b: &Bounds) -> SpectralInterval {
    let (lo, lo_closed) = if a.lo > b.lo {
        (a.lo, a.lo_closed)
    } else if b.lo > a.lo {
        (b.lo, b.lo_closed)
    } else {
        (a.lo, a.lo_closed && b.lo_closed)
    };
    let (hi, hi_closed) = if a.hi < b.hi {
        (a.hi, a.hi_closed)
    } else if b.hi < a.hi {
        (b.hi, b.hi_closed)
    } else {
        (a.hi, a.hi_closed && b.hi_closed)
    };
    SpectralInterval::bounded(lo, hi, lo_closed, hi_closed)
}

impl fmt::Display for SpectralInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |f: &mut fmt::Formatter<'_>, b: &Bounds| {
            write!(
                f,
                "{}{}, {}{}",
                if b.lo_closed { '[' } else { '(' },
                b.lo,
                b.hi,
                if b.hi_closed { ']' } else { ')' }
            )
        };
        match self {
            SpectralInterval::Empty => f.write_str("{}"),
            SpectralInterval::Real => f.write_str("R"),
            SpectralInterval::Bounded(b) => show(f, b),
            SpectralInterval::Complement(b) => {
                f.write_str("R \\ ")?;
                show(f, b)
            }
        }
    }
}

/// `E(Delta) f = chi_Delta f`.
pub fn apply_e(delta: &SpectralInterval, f: &TestFunction) -> TestFunction {
    match *delta {
        SpectralInterval::Real => f.clone(),
        SpectralInterval::Empty => TestFunction::zero(),
        d => {
            let support = match d {
                SpectralInterval::Bounded(_) => Support::Compact(d.sup_abs()),
                _ => Support::Full,
            };
            f.restrict(move |x| d.contains(x), support, &d.endpoints())
        }
    }
}

/// Dyadic panel layout in `|x|` for the Ritz subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub panels_per_octave: usize,
    /// Outer radius; raised to `4 sup|Delta|` where needed.
    pub k_max: f64,
    /// Extra panel edges in `|x|`.
    pub extra_edges: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            panels_per_octave: 4,
            k_max: 16.0,
            extra_edges: Vec::new(),
        }
    }
}

impl GridSpec {
    fn edges(&self, epsilon: f64) -> Vec<f64> {
        let per = self.panels_per_octave.max(1) as f64;
        let mut e = vec![epsilon];
        let mut j = 1.0;
        loop {
            let x = epsilon * 2f64.powf(j / per);
            if x >= self.k_max * (1.0 - 1e-12) {
                break;
            }
            e.push(x);
            j += 1.0;
        }
        e.push(self.k_max);
        e.extend(
            self.extra_edges
                .iter()
                .map(|x| x.abs())
                .filter(|&x| x > epsilon && x < self.k_max),
        );
        e.sort_by(f64::total_cmp);
        e.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        e
    }
}

/// Piecewise-constant Ritz subspace of `dom t_alpha` on mirror panel pairs.
#[derive(Debug, Clone)]
pub struct RitzSpace {
    pub alpha: Alpha,
    /// Panels as `(lo, hi]`; entries come in mirror pairs `-P, P`.
    pub panels: Vec<(f64, f64)>,
    pub gram: DMatrix<f64>,
    chol_l: DMatrix<f64>,
}

/// Tolerance and cap for the power iteration.
pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RitzSpace {
    pub fn build(alpha: Alpha, grid: &GridSpec, ctx: &FormContext) -> Result<Self, EigenError> {
        let eps = ctx.weight.epsilon();
        let edges = grid.edges(eps);
        if edges.len() < 2 {
            return Err(EigenError::SingularGram("no panels outside the gap".into()));
        }
        let pos: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
        let blocks: Vec<[f64; 3]> = pos
            .par_iter()
            .map(|&(a, b)| -> Result<[f64; 3], EigenError> {
                let neg = TestFunction::indicator(-b, -a);
                let p = TestFunction::indicator(a, b);
                let nn = ctx.t_alpha_pos(&neg, &neg, alpha)?.value.re;
                let pp = ctx.t_alpha_pos(&p, &p, alpha)?.value.re;
                let np = ctx.t_alpha_pos(&neg, &p, alpha)?.value.re;
                Ok([nn, pp, np])
            })
            .collect::<Result<_, _>>()?;
        let n = 2 * pos.len();
        let mut gram = DMatrix::zeros(n, n);
        let mut panels = Vec::with_capacity(n);
        for (j, (&(a, b), blk)) in pos.iter().zip(&blocks).enumerate() {
            panels.push((-b, -a));
            panels.push((a, b));
            gram[(2 * j, 2 * j)] = blk[0];
            gram[(2 * j + 1, 2 * j + 1)] = blk[1];
            gram[(2 * j, 2 * j + 1)] = blk[2];
            gram[(2 * j + 1, 2 * j)] = blk[2];
        }
        let chol = nalgebra::Cholesky::new(gram.clone())
            .ok_or_else(|| EigenError::SingularGram("Cholesky factorization failed".into()))?;
        let l = chol.l();
        let diag_min = l
            .diagonal()
            .iter()
            .fold(f64::INFINITY, |m, &d| m.min(d * d));
        let diag_max = gram.diagonal().iter().fold(0.0f64, |m, &d| m.max(d));
        if !(diag_min > 1e-14 * diag_max) {
            return Err(EigenError::SingularGram(format!(
                "pivot {diag_min:e} vs scale {diag_max:e}"
            )));
        }
        Ok(Self {
            alpha,
            panels,
            gram,
            chol_l: l,
        })
    }

    fn selector(&self, delta: &SpectralInterval) -> Vec<bool> {
        self.panels
            .iter()
            .map(|&(a, b)| delta.contains(0.5 * (a + b)))
            .collect()
    }

    /// Largest `sqrt(t(chi f, chi f) / t(f, f))` over the subspace.
    pub fn estimate(&self, delta: &SpectralInterval) -> NormEstimate {
        let sel = self.selector(delta);
        let n = sel.len();
        let l = &self.chol_l;
        let dg_d = {
            let mut m = self.gram.clone();
            for i in 0..n {
                for j in 0..n {
                    if !(sel[i] && sel[j]) {
                        m[(i, j)] = 0.0;
                    }
                }
            }
            m
        };
        // B = L^-1 (D G D) L^-T, symmetric positive semidefinite.
        let apply_b = |y: &DVector<f64>| -> DVector<f64> {
            let v = l.tr_solve_lower_triangular(y).expect("invertible factor");
            let w = &dg_d * v;
            l.solve_lower_triangular(&w).expect("invertible factor")
        };
        let mut y = l.transpose() * DVector::from_element(n, 1.0);
        let mut mu = 0.0;
        for it in 1..=POWER_MAX_ITER {
            let ny = y.norm();
            if ny == 0.0 {
                return NormEstimate {
                    value: 0.0,
                    iterations: it,
                    converged: true,
                };
            }
            y /= ny;
            let by = apply_b(&y);
            let next = y.dot(&by).max(0.0);
            if next == 0.0 || (next - mu).abs() <= POWER_TOL * next {
                return NormEstimate {
                    value: next.sqrt(),
                    iterations: it,
                    converged: true,
                };
            }
            mu = next;
            y = by;
        }
        NormEstimate {
            value: mu.sqrt(),
            iterations: POWER_MAX_ITER,
            converged: false,
        }
    }
}

fn grid_for(delta: &SpectralInterval, grid: &GridSpec) -> GridSpec {
    let mut g = grid.clone();
    let sup = delta.sup_abs();
    if sup.is_finite() {
        g.k_max = g.k_max.max(4.0 * sup);
    }
    g.extra_edges.extend(delta.endpoints());
    g
}

/// Ritz lower bound for `||E_alpha(Delta)||_alpha`.
pub fn estimate_projection_norm(
    delta: &SpectralInterval,
    alpha: Alpha,
    grid: &GridSpec,
    ctx: &FormContext,
) -> Result<NormEstimate, EigenError> {
    let space = RitzSpace::build(alpha, &grid_for(delta, grid), ctx)?;
    Ok(space.estimate(delta))
}

/// `(g_0, g_0)_{eta_alpha}`; infinite at `alpha = 0`.
pub fn g0_eta_constant(alpha: Alpha, ctx: &FormContext) -> Result<f64, EigenError> {
    let g0 = make_g_tau(0.0, &ctx.weight)?;
    let w = ctx.weight.derived(WeightKind::Eta(alpha));
    let res = integrate_norm_squared(&g0, &w, true, &ctx.cfg)?;
    Ok(match res.status {
        Status::Converged => res.value.re,
        _ => f64::INFINITY,
    })
}

/// `2 (k^{alpha/2} - eps^{alpha/2}) / (alpha c_alpha)`; zero at `alpha = 0`.
pub fn paper_lower_bound(alpha: f64, epsilon: f64, k: f64, c_alpha: f64) -> f64 {
    if alpha == 0.0 || !c_alpha.is_finite() {
        return 0.0;
    }
    2.0 * (k.powf(0.5 * alpha) - epsilon.powf(0.5 * alpha)) / (alpha * c_alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSample {
    pub k: f64,
    pub norm_estimate: f64,
    pub paper_lower_bound: f64,
    pub sqrt_variant_bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCurve {
    pub alpha: f64,
    pub epsilon: f64,
    pub samples: Vec<GrowthSample>,
    pub fitted_exponent: f64,
}

/// Slope of `log y` against `log k`, skipping non-positive values.
pub fn fit_loglog(points: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(k, y)| k > 0.0 && y > 0.0)
        .map(|(k, y)| (k.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    least_squares_slope(&pts)
}

/// Samples `||E_alpha((eps, k])||` along `ks`.
pub fn growth_curve(
    alpha: Alpha,
    ks: &[f64],
    grid: &GridSpec,
    ctx: &FormContext,
) -> Result<GrowthCurve, EigenError> {
    let eps = ctx.weight.epsilon();
    if ks.is_empty() {
        return Err(EigenError::InvalidSchedule("empty".into()));
    }
    if ks.iter().any(|&k| !(k.is_finite() && k > eps)) {
        return Err(EigenError::InvalidSchedule(format!(
            "all k must exceed epsilon = {eps}"
        )));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EigenError::InvalidSchedule(
            "k must be strictly increasing".into(),
        ));
    }
    let kmax = *ks.last().expect("nonempty");
    let mut g = grid.clone();
    g.k_max = g.k_max.max(4.0 * kmax);
    g.extra_edges.extend_from_slice(ks);
    let space = RitzSpace::build(alpha, &g, ctx)?;
    let c_alpha = if alpha.value() == 0.0 {
        f64::INFINITY
    } else {
        g0_eta_constant(alpha, ctx)?
    };
    let samples: Vec<GrowthSample> = ks
        .par_iter()
        .map(|&k| {
            let est = space.estimate(&SpectralInterval::left_open(eps, k));
            let pb = paper_lower_bound(alpha.value(), eps, k, c_alpha);
            GrowthSample {
                k,
                norm_estimate: est.value,
                paper_lower_bound: pb,
                sqrt_variant_bound: pb.sqrt(),
                converged: est.converged,
            }
        })
        .collect();
    let fitted_exponent = fit_loglog(samples.iter().map(|s| (s.k, s.norm_estimate)));
    Ok(GrowthCurve {
        alpha: alpha.value(),
        epsilon: eps,
        samples,
        fitted_exponent,
    })
}

impl GrowthCurve {
    pub fn max_estimate(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.norm_estimate))
    }

    /// Samples with `norm_estimate < sqrt_variant_bound - tol`.
    pub fn dominance_violations(&self, tol: f64) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.norm_estimate < s.sqrt_variant_bound - tol)
            .map(|s| s.k)
            .collect()
    }

    /// Samples where the bound with the unsquared norm exceeds the estimate.
    pub fn paper_bound_excess(&self) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.norm_estimate < s.paper_lower_bound)
            .map(|s| s.k)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "alpha,k,norm_estimate,paper_lower_bound,sqrt_variant_bound,fitted_exponent"
        )?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.alpha,
                s.k,
                s.norm_estimate,
                s.paper_lower_bound,
                s.sqrt_variant_bound,
                self.fitted_exponent
            )?;
        }
        let maxb = |f: fn(&GrowthSample) -> f64| self.samples.iter().map(f).fold(0.0, f64::max);
        writeln!(
            out,
            "{},aggregate,{},{},{},{}",
            self.alpha,
            self.max_estimate(),
            maxb(|s| s.paper_lower_bound),
            maxb(|s| s.sqrt_variant_bound),
            self.fitted_exponent
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Regular,
    Singular,
    /// Slow growth over too short a range to decide.
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Regular => "regular",
            Classification::Singular => "singular",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPointVerdict {
    pub classification: Classification,
    pub fitted_exponent: f64,
    pub bounded_witness: Option<f64>,
}

pub const DEFAULT_EXPONENT_MARGIN: f64 = 0.1;

/// Singular iff the fitted exponent exceeds `margin`.
///
/// For `0 < alpha <= 0.2` the curve must span four decades in `k`.
/// `alpha = 0` is exempt: its norm is bounded by an explicit sandwich.
pub fn classify_infinity(
    curve: &GrowthCurve,
    margin: f64,
) -> Result<CriticalPointVerdict, EigenError> {
    let n = curve.samples.len();
    if n < 4 {
        return Err(EigenError::InsufficientSamples { needed: 4, got: n });
    }
    let span = (curve.samples[n - 1].k / curve.samples[0].k).log10();
    let classification = if curve.alpha > 0.0 && curve.alpha <= 0.2 && span < 4.0 {
        Classification::Indeterminate
    } else if curve.fitted_exponent > margin {
        Classification::Singular
    } else {
        Classification::Regular
    };
    Ok(CriticalPointVerdict {
        classification,
        fitted_exponent: curve.fitted_exponent,
        bounded_witness: (classification == Classification::Regular).then(|| curve.max_estimate()),
    })
}

/// `t_alpha(g_k, g_k)` for `g_k = E((eps, k]) g_0`, with its odd-part term
/// `2 (g_k,o, g_k,o)_{omega_alpha}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceWitness {
    pub k: f64,
    pub odd_term: f64,
    pub total: f64,
    /// `(2/alpha)(k^{alpha/2} - eps^{alpha/2})`, or `log(k/eps)` at `alpha = 0`.
    pub predicted_odd_term: f64,
}

pub fn divergence_witness(
    alpha: Alpha,
    k: f64,
    ctx: &FormContext,
) -> Result<DivergenceWitness, EigenError> {
    let eps = ctx.weight.epsilon();
    let g0 = make_g_tau(0.0, &ctx.weight)?;
    let gk = apply_e(&SpectralInterval::left_open(eps, k), &g0);
    let odd = ctx.odd_part_term(&gk, &gk, alpha)?.value.re * 2.0;
    let total = ctx.t_alpha_pos(&gk, &gk, alpha)?.value.re;
    let a = alpha.value();
    let predicted = if a == 0.0 {
        (k / eps).ln()
    } else {
        2.0 / a * (k.powf(0.5 * a) - eps.powf(0.5 * a))
    };
    Ok(DivergenceWitness {
        k,
        odd_term: odd,
        total,
        predicted_odd_term: predicted,
    })
}

/// `E((eps, k]) g_0` agrees with the truncation `g_k`.
pub fn right_truncation(ctx: &FormContext, k: f64) -> Result<TestFunction, EigenError> {
    let g0 = make_g_tau(0.0, &ctx.weight)?;
    let eps = ctx.weight.epsilon();
    Ok(truncate(&g0, k).restrict(move |x| x > eps, Support::Compact(k), &[eps]))
}

/// Pointwise `|E(Delta) f - g|` maximum on `xs`.
pub fn max_pointwise_gap(a: &TestFunction, b: &TestFunction, xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| (a.eval(x) - b.eval(x)).norm())
        .fold(0.0, f64::max)
}

/// Fixed sample points for pointwise checks: both signs, inside and outside the gap.
pub fn probe_points(eps: f64, kmax: f64, n: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let t = (i as f64 + 0.37) / n as f64;
        let x = (eps * 0.5) * (kmax * 2.0 / eps).powf(t);
        xs.push(x);
        xs.push(-x);
    }
    xs.push(0.0);
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::make_f_tau;

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn projection_algebra_pointwise() {
        let ctx = FormContext::default();
        let f = make_f_tau(1.0, &ctx.weight)
            .unwrap()
            .add(&make_g_tau(0.5, &ctx.weight).unwrap());
        let xs = probe_points(1.0, 16.0, 200);
        assert_eq!(
            max_pointwise_gap(&apply_e(&SpectralInterval::Real, &f), &f, &xs),
            0.0
        );
        let z = apply_e(&SpectralInterval::Empty, &f);
        assert_eq!(max_pointwise_gap(&z, &TestFunction::zero(), &xs), 0.0);
        let d1 = SpectralInterval::left_open(1.0, 4.0);
        let d2 = SpectralInterval::closed(-4.0, 4.0);
        let lhs = apply_e(&d1, &apply_e(&d2, &f));
        let rhs = apply_e(&d1.intersect(&d2).unwrap(), &f);
        assert_eq!(max_pointwise_gap(&lhs, &apply_e(&d1, &f), &xs), 0.0);
        assert_eq!(max_pointwise_gap(&lhs, &rhs, &xs), 0.0);
        let left = SpectralInterval::left_open(-3.0, 2.0);
        let right = SpectralInterval::left_open(2.0, 7.0);
        let sum = apply_e(&left, &f).add(&apply_e(&right, &f));
        let union = apply_e(&SpectralInterval::left_open(-3.0, 7.0), &f);
        assert_eq!(max_pointwise_gap(&sum, &union, &xs), 0.0);
    }

    #[test]
    fn complement_intersections() {
        let b = SpectralInterval::closed(0.0, 10.0);
        let hole = SpectralInterval::complement_of(2.0, 3.0, true, true);
        assert_eq!(b.intersect(&hole), None);
        let cut = SpectralInterval::complement_of(-1.0, 3.0, true, true);
        assert_eq!(
            b.intersect(&cut),
            Some(SpectralInterval::bounded(3.0, 10.0, false, true))
        );
        assert_eq!(
            b.intersect(&SpectralInterval::complement_of(-1.0, 11.0, false, false)),
            Some(SpectralInterval::Empty)
        );
    }

    #[test]
    fn right_truncation_of_g0() {
        let ctx = FormContext::default();
        let g0 = make_g_tau(0.0, &ctx.weight).unwrap();
        let via_e = apply_e(&SpectralInterval::left_open(1.0, 8.0), &g0);
        let gk = right_truncation(&ctx, 8.0).unwrap();
        assert_eq!(
            max_pointwise_gap(&via_e, &gk, &probe_points(1.0, 16.0, 300)),
            0.0
        );
    }

    #[test]
    fn full_symmetric_window_has_norm_one() {
        let ctx = FormContext::default();
        for al in [0.0, 0.5, 1.0, 2.0] {
            for k in [2.0, 10.0] {
                let e = estimate_projection_norm(
                    &SpectralInterval::closed(-k, k),
                    a(al),
                    &GridSpec::default(),
                    &ctx,
                )
                .unwrap();
                assert!((e.value - 1.0).abs() < 1e-6, "alpha {al} k {k}: {e:?}");
            }
        }
    }

    #[test]
    fn gap_window_has_norm_zero() {
        let ctx = FormContext::default();
        let e = estimate_projection_norm(
            &SpectralInterval::open(-0.5, 0.5),
            a(1.0),
            &GridSpec::default(),
            &ctx,
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn alpha_zero_estimates_are_sqrt_two() {
        let ctx = FormContext::default();
        let c = growth_curve(a(0.0), &[2.0, 4.0, 8.0, 16.0], &GridSpec::default(), &ctx).unwrap();
        for s in &c.samples {
            assert!((s.norm_estimate - 2f64.sqrt()).abs() < 1e-6, "{s:?}");
            assert!(s.norm_estimate <= 2f64.sqrt() + 1.0);
        }
        let v = classify_infinity(&c, DEFAULT_EXPONENT_MARGIN).unwrap();
        assert_eq!(v.classification, Classification::Regular);
    }

    #[test]
    fn alpha_two_estimate_near_pointwise_sup() {
        // The pointwise ratio on the panel (x, k] is 1 + x^alpha.
        let ctx = FormContext::default();
        let grid = GridSpec {
            panels_per_octave: 8,
            ..GridSpec::default()
        };
        let e =
            estimate_projection_norm(&SpectralInterval::left_open(1.0, 10.0), a(2.0), &grid, &ctx)
                .unwrap();
        let lo = 1.0 + (10.0 * 2f64.powf(-1.0 / 8.0)).powi(2);
        assert!(
            e.value >= lo.sqrt() - 1e-6 && e.value <= 101f64.sqrt() + 1e-9,
            "{e:?}"
        );
    }

    #[test]
    fn paper_bound_constant() {
        let ctx = FormContext::default();
        let c2 = g0_eta_constant(a(2.0), &ctx).unwrap();
        assert!((c2 - 0.934_320_049_292_896).abs() < 1e-8);
        assert!((paper_lower_bound(2.0, 1.0, 10.0, c2) - 9.0 / c2).abs() < 1e-12);
        assert!((9.0 / c2 - 9.632_67).abs() < 1e-4);
        let c1 = g0_eta_constant(a(1.0), &ctx).unwrap();
        let slope = fit_loglog(
            [1e6, 1e7, 1e8]
                .iter()
                .map(|&k| (k, paper_lower_bound(1.0, 1.0, k, c1))),
        );
        assert!((slope - 0.5).abs() < 1e-3);
    }

    #[test]
    fn growth_curves_classify() {
        let ctx = FormContext::default();
        let ks: Vec<f64> = (1..=8).map(|j| 2f64.powi(j)).collect();
        let c = growth_curve(a(2.0), &ks, &GridSpec::default(), &ctx).unwrap();
        assert!(c.dominance_violations(1e-9).is_empty());
        let v = classify_infinity(&c, DEFAULT_EXPONENT_MARGIN).unwrap();
        assert_eq!(v.classification, Classification::Singular);
        assert!((v.fitted_exponent - 1.0).abs() < 0.15, "{v:?}");
        let short = GrowthCurve {
            samples: c.samples[..3].to_vec(),
            ..c.clone()
        };
        assert!(matches!(
            classify_infinity(&short, 0.1),
            Err(EigenError::InsufficientSamples { .. })
        ));
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "alpha,k,norm_estimate,paper_lower_bound,sqrt_variant_bound,fitted_exponent\n"
        ));
        assert_eq!(text.lines().count(), ks.len() + 2);
    }

    #[test]
    fn small_alpha_short_range_is_indeterminate() {
        let ctx = FormContext::default();
        let c = growth_curve(a(0.1), &[2.0, 4.0, 8.0, 16.0], &GridSpec::default(), &ctx).unwrap();
        let v = classify_infinity(&c, DEFAULT_EXPONENT_MARGIN).unwrap();
        assert_eq!(v.classification, Classification::Indeterminate);
    }

    #[test]
    fn odd_term_matches_closed_form() {
        let ctx = FormContext::default();
        for al in [0.5, 1.0, 2.0] {
            let mut last = 0.0;
            for k in [4.0, 16.0, 64.0] {
                let w = divergence_witness(a(al), k, &ctx).unwrap();
                assert!(
                    (w.odd_term - w.predicted_odd_term).abs() <= 1e-6 * w.predicted_odd_term,
                    "{w:?}"
                );
                assert!(w.total > last);
                last = w.total;
            }
        }
    }
}
