//! Finite-dimensional Krein spaces `(C^N, [.,.], A)` discretizing the model,
//! with `E(Delta)` computed from the resolvent by contour integration.
//!
//! The operator is multiplication by the grid points, so the resolvent is
//! diagonal and the contour integral of `(A - lambda)^-1` reduces to one
//! scalar integral per grid point.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eigenspectral::{Bounds, SpectralInterval};
use crate::forms::{FormContext, FormError};
use crate::model_space::{Alpha, TestFunction, Weight};
use crate::quadrature::GaussLegendre;
use crate::report::{Check, Report};

#[derive(Debug, Error)]
pub enum ContourError {
    #[error(
        "grid violates the gap [-{epsilon}, {epsilon}] or is not strictly increasing: {reason}"
    )]
    GapViolation { epsilon: f64, reason: String },
    #[error("positive Gram matrix is not positive definite")]
    SingularGram,
    #[error("lambda = {lambda} is within {distance:e} of the spectrum")]
    PoleHit { lambda: Complex64, distance: f64 },
    #[error("interval endpoint {endpoint} cannot be separated from the spectrum (distance {distance:e})")]
    EndpointOnSpectrum { endpoint: f64, distance: f64 },
    #[error("invalid contour specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Diagonal realization of the model on a grid avoiding the gap.
#[derive(Debug, Clone)]
pub struct DiscretizedModel {
    pub alpha: Alpha,
    pub epsilon: f64,
    pub grid: Vec<f64>,
    /// Cell `i` is `(cells[i].0, cells[i].1]` and contains `grid[i]`.
    pub cells: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub r: Vec<f64>,
    pub gram_pos: DMatrix<f64>,
    /// Diagonal of the indefinite Gram matrix, `r_i w_i`.
    pub gram_ind: Vec<f64>,
}

/// Cells of one sign side, in `|x|`: the first starts at `eps`, interior
/// boundaries are midpoints, the last is reflected about its point.
fn side_cells(abs_sorted: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let m = abs_sorted.len();
    let mut bounds = Vec::with_capacity(m + 1);
    bounds.push(eps);
    for w in abs_sorted.windows(2) {
        bounds.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = abs_sorted.last() {
        let prev = bounds[m - 1];
        bounds.push(2.0 * last - prev);
    }
    bounds.windows(2).map(|b| (b[0], b[1])).collect()
}

pub fn build_discretized_model(
    alpha: Alpha,
    ctx: &FormContext,
    grid: &[f64],
) -> Result<DiscretizedModel, ContourError> {
    let eps = ctx.weight.epsilon();
    let gap = |reason: String| ContourError::GapViolation {
        epsilon: eps,
        reason,
    };
    if grid.is_empty() {
        return Err(gap("empty grid".into()));
    }
    if let Some(x) = grid.iter().find(|x| !(x.is_finite() && x.abs() > eps)) {
        return Err(gap(format!("point {x} lies in the gap")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(gap("points not strictly increasing".into()));
    }
    let neg: Vec<f64> = grid
        .iter()
        .rev()
        .filter(|&&x| x < 0.0)
        .map(|x| -x)
        .collect();
    let pos: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.0).collect();
    let mut cells: Vec<(f64, f64)> = side_cells(&neg, eps)
        .into_iter()
        .rev()
        .map(|(a, b)| (-b, -a))
        .collect();
    cells.extend(side_cells(&pos, eps));

    let weights: Vec<f64> = cells.iter().map(|c| c.1 - c.0).collect();
    let r: Vec<f64> = grid.iter().map(|&x| ctx.weight.eval(x)).collect();
    let gram_ind: Vec<f64> = r.iter().zip(&weights).map(|(r, w)| r * w).collect();

    let n = grid.len();
    let overlaps = |i: usize, j: usize| {
        let (a, b) = abs_range(cells[i]);
        let (c, d) = abs_range(cells[j]);
        a < d && c < b
    };
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| overlaps(i, j))
        .collect();
    let indicators: Vec<TestFunction> = cells
        .iter()
        .map(|&(a, b)| TestFunction::indicator(a, b))
        .collect();
    let entries: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            Ok(ctx
                .t_alpha_pos(&indicators[i], &indicators[j], alpha)?
                .value
                .re)
        })
        .collect::<Result<_, FormError>>()?;
    let mut gram_pos = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&entries) {
        gram_pos[(i, j)] = v;
        gram_pos[(j, i)] = v;
    }
    if nalgebra::Cholesky::new(gram_pos.clone()).is_none() {
        return Err(ContourError::SingularGram);
    }
    Ok(DiscretizedModel {
        alpha,
        epsilon: eps,
        grid: grid.to_vec(),
        cells,
        weights,
        r,
        gram_pos,
        gram_ind,
    })
}

fn abs_range((a, b): (f64, f64)) -> (f64, f64) {
    if a >= 0.0 {
        (a, b)
    } else {
        (-b, -a)
    }
}

impl DiscretizedModel {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.grid.iter().fold(1.0, |m, x| m.max(x.abs()))
    }

    pub fn operator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.grid))
    }

    pub fn gram_ind_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.gram_ind))
    }

    /// `diag(chi_Delta(x_i))`
    pub fn characteristic(&self, delta: &SpectralInterval) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.len(),
            self.grid
                .iter()
                .map(|&x| if delta.contains(x) { 1.0 } else { 0.0 }),
        ))
    }

    fn distance_to_spectrum(&self, z: Complex64) -> f64 {
        self.grid
            .iter()
            .map(|&x| (Complex64::new(x, 0.0) - z).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(A - lambda)^-1 v`
pub fn resolvent_apply(
    model: &DiscretizedModel,
    lambda: Complex64,
    v: &[Complex64],
) -> Result<Vec<Complex64>, ContourError> {
    let distance = model.distance_to_spectrum(lambda);
    if distance < 1e-12 * model.scale() {
        return Err(ContourError::PoleHit { lambda, distance });
    }
    Ok(model
        .grid
        .iter()
        .zip(v)
        .map(|(&x, &vi)| vi / (Complex64::new(x, 0.0) - lambda))
        .collect())
}

/// Rectangle `[a - e, b + e] x [-1, 1]` with the pieces `|Im| < delta` of
/// the vertical sides removed.
///
/// Both schedules are fractions of the distance between the endpoints of
/// `Delta` and the spectrum, and are used as a two-step double limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub nodes_per_segment: usize,
    pub epsilon_schedule: Vec<f64>,
    pub delta_schedule: Vec<f64>,
    /// Longest horizontal panel.
    pub max_panel: f64,
    /// Ratio of consecutive panels on the graded vertical sides.
    pub grading: f64,
    /// Agreement required between the last two schedule steps.
    pub tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            nodes_per_segment: 16,
            epsilon_schedule: vec![0.5, 0.25],
            delta_schedule: vec![1e-9, 1e-11],
            max_panel: 0.5,
            grading: 2.0,
            tol: 1e-8,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<(), ContourError> {
        let bad = |m: &str| Err(ContourError::InvalidSpec(m.into()));
        if self.nodes_per_segment < 16 {
            return bad("nodes_per_segment must be at least 16");
        }
        for (name, s) in [
            ("epsilon", &self.epsilon_schedule),
            ("delta", &self.delta_schedule),
        ] {
            if s.is_empty() || s.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(ContourError::InvalidSpec(format!(
                    "{name} schedule must lie in (0,1)"
                )));
            }
            if s.windows(2).any(|w| w[1] >= w[0]) {
                return Err(ContourError::InvalidSpec(format!(
                    "{name} schedule must be strictly decreasing"
                )));
            }
        }
        if !(self.max_panel > 0.0 && self.grading > 1.0) {
            return bad("max_panel must be positive and grading above 1");
        }
        Ok(())
    }
}

/// Nodes and weights (`dlambda`) along the straight segment `z0 -> z1`.
fn segment(
    rule: &GaussLegendre,
    z0: Complex64,
    z1: Complex64,
    out: &mut Vec<(Complex64, Complex64)>,
) {
    let half = 0.5 * (z1 - z0);
    let mid = 0.5 * (z1 + z0);
    for (t, w) in rule.nodes().iter().zip(rule.weights()) {
        out.push((mid + half * *t, half * *w));
    }
}

fn horizontal(
    rule: &GaussLegendre,
    y: f64,
    x0: f64,
    x1: f64,
    max_panel: f64,
    out: &mut Vec<(Complex64, Complex64)>,
) {
    let m = ((x1 - x0).abs() / max_panel).ceil().max(1.0) as usize;
    for j in 0..m {
        let a = x0 + (x1 - x0) * j as f64 / m as f64;
        let b = x0 + (x1 - x0) * (j + 1) as f64 / m as f64;
        segment(rule, Complex64::new(a, y), Complex64::new(b, y), out);
    }
}

/// Vertical piece at `Re = x` from `Im = y0` to `Im = y1` (same sign),
/// graded geometrically towards the real axis.
fn vertical(
    rule: &GaussLegendre,
    x: f64,
    y0: f64,
    y1: f64,
    q: f64,
    out: &mut Vec<(Complex64, Complex64)>,
) {
    let (small, large) = if y0.abs() < y1.abs() {
        (y0, y1)
    } else {
        (y1, y0)
    };
    let mut cuts = vec![small.abs()];
    while *cuts.last().expect("nonempty") * q < large.abs() {
        let next = cuts.last().expect("nonempty") * q;
        cuts.push(next);
    }
    cuts.push(large.abs());
    let sign = y0.signum();
    let mut pieces: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|c| (sign * c[0], sign * c[1]))
        .collect();
    if y0.abs() > y1.abs() {
        pieces = pieces.into_iter().rev().map(|(a, b)| (b, a)).collect();
    }
    for (a, b) in pieces {
        segment(rule, Complex64::new(x, a), Complex64::new(x, b), out);
    }
}

/// Quadrature nodes of the indented rectangle, counterclockwise:
/// `b+i -> a+i -> a-i -> b-i -> b+i`.
fn contour_nodes(a: f64, b: f64, delta: f64, spec: &ContourSpec) -> Vec<(Complex64, Complex64)> {
    let rule = GaussLegendre::new(spec.nodes_per_segment);
    let mut out = Vec::new();
    horizontal(&rule, 1.0, b, a, spec.max_panel, &mut out);
    vertical(&rule, a, 1.0, delta, spec.grading, &mut out);
    vertical(&rule, a, -delta, -1.0, spec.grading, &mut out);
    horizontal(&rule, -1.0, a, b, spec.max_panel, &mut out);
    vertical(&rule, b, -1.0, -delta, spec.grading, &mut out);
    vertical(&rule, b, delta, 1.0, spec.grading, &mut out);
    out
}

/// `-(1/2 pi i) int_C (A - lambda)^-1 v dlambda` over one contour.
fn contour_apply(
    model: &DiscretizedModel,
    nodes: &[(Complex64, Complex64)],
    v: &[Complex64],
) -> Result<Vec<Complex64>, ContourError> {
    let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
    for &(z, dz) in nodes {
        let res = resolvent_apply(model, z, v)?;
        for (a, r) in acc.iter_mut().zip(res) {
            *a += r * dz;
        }
    }
    let factor = -1.0 / Complex64::new(0.0, 2.0 * PI);
    Ok(acc.into_iter().map(|a| a * factor).collect())
}

/// Diagnostics of the two-step double limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourDiagonal {
    pub values: Vec<Complex64>,
    /// Largest change between the last two `delta` steps at the final `epsilon`.
    pub delta_change: f64,
    /// Largest change between the last two `epsilon` steps.
    pub epsilon_change: f64,
}

fn bounded_diagonal(
    model: &DiscretizedModel,
    b: &Bounds,
    spec: &ContourSpec,
) -> Result<ContourDiagonal, ContourError> {
    let sep = [b.lo, b.hi]
        .iter()
        .map(|&e| (e, model.distance_to_spectrum(Complex64::new(e, 0.0))))
        .fold((b.lo, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m });
    if sep.1 < 1e-9 * model.scale() {
        return Err(ContourError::EndpointOnSpectrum {
            endpoint: sep.0,
            distance: sep.1,
        });
    }
    let ones = vec![Complex64::new(1.0, 0.0); model.len()];
    let mut by_eps: Vec<Vec<Complex64>> = Vec::new();
    let mut delta_change = 0.0;
    for &fe in &spec.epsilon_schedule {
        let e = fe * sep.1;
        let mut by_delta: Vec<Vec<Complex64>> = Vec::new();
        for &fd in &spec.delta_schedule {
            let nodes = contour_nodes(b.lo - e, b.hi + e, fd * sep.1, spec);
            by_delta.push(contour_apply(model, &nodes, &ones)?);
        }
        delta_change = last_change(&by_delta);
        by_eps.push(by_delta.pop().expect("nonempty schedule"));
    }
    let epsilon_change = last_change(&by_eps);
    if epsilon_change > spec.tol {
        return Err(ContourError::EndpointOnSpectrum {
            endpoint: sep.0,
            distance: sep.1,
        });
    }
    Ok(ContourDiagonal {
        values: by_eps.pop().expect("nonempty schedule"),
        delta_change,
        epsilon_change,
    })
}

fn last_change(steps: &[Vec<Complex64>]) -> f64 {
    match steps {
        [.., p, q] => p
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Diagonal of the contour-built `E(Delta)`; complements via `I - E(R \ Delta)`.
pub fn contour_diagonal(
    model: &DiscretizedModel,
    delta: &SpectralInterval,
    spec: &ContourSpec,
) -> Result<ContourDiagonal, ContourError> {
    spec.validate()?;
    let n = model.len();
    let constant = |c: f64| ContourDiagonal {
        values: vec![Complex64::new(c, 0.0); n],
        delta_change: 0.0,
        epsilon_change: 0.0,
    };
    match delta {
        SpectralInterval::Empty => Ok(constant(0.0)),
        SpectralInterval::Real => Ok(constant(1.0)),
        SpectralInterval::Bounded(b) => bounded_diagonal(model, b, spec),
        SpectralInterval::Complement(b) => {
            let mut d = bounded_diagonal(model, b, spec)?;
            for v in &mut d.values {
                *v = Complex64::new(1.0, 0.0) - *v;
            }
            Ok(d)
        }
    }
}

/// `E(Delta)` as a real matrix (the imaginary part is quadrature noise).
pub fn contour_spectral_projection(
    model: &DiscretizedModel,
    delta: &SpectralInterval,
    spec: &ContourSpec,
) -> Result<DMatrix<f64>, ContourError> {
    let d = contour_diagonal(model, delta, spec)?;
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(
        model.len(),
        d.values.iter().map(|v| v.re),
    )))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Tolerances used by the spectral-calculus checks.
pub const MATCH_TOL: f64 = 1e-6;
pub const ALGEBRA_TOL: f64 = 2e-6;
pub const COMMUTE_TOL: f64 = 1e-8;

/// Eigenvalues of `A` restricted to `range(P)`.
pub fn restricted_spectrum(model: &DiscretizedModel, p: &DMatrix<f64>) -> Vec<f64> {
    let svd = p.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 0.5)
        .collect();
    if cols.is_empty() {
        return Vec::new();
    }
    let basis = u.select_columns(cols.iter());
    let ritz = basis.transpose() * model.operator() * &basis;
    let mut ev: Vec<f64> = SymmetricEigen::new(ritz)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn closure_contains(delta: &SpectralInterval, x: f64, tol: f64) -> bool {
    match delta {
        SpectralInterval::Empty => false,
        SpectralInterval::Real => true,
        SpectralInterval::Bounded(b) => x >= b.lo - tol && x <= b.hi + tol,
        SpectralInterval::Complement(b) => x <= b.lo + tol || x >= b.hi - tol,
    }
}

fn closure_sign(delta: &SpectralInterval) -> Option<f64> {
    match delta {
        SpectralInterval::Bounded(b) if b.lo > 0.0 => Some(1.0),
        SpectralInterval::Bounded(b) if b.hi < 0.0 => Some(-1.0),
        _ => None,
    }
}

fn single_interval_checks(
    model: &DiscretizedModel,
    delta: &SpectralInterval,
    p: &DMatrix<f64>,
    label: &str,
) -> Report {
    let mut rep = Report::new();
    let chi = model.characteristic(delta);
    rep.push(Check::within(
        format!("{label}: match chi"),
        max_abs(&(p - &chi)),
        MATCH_TOL,
    ));
    rep.push(Check::within(
        format!("{label}: idempotent"),
        max_abs(&(p * p - p)),
        ALGEBRA_TOL,
    ));
    let g = model.gram_ind_matrix();
    let gp = &g * p;
    let sym_scale = max_abs(&g).max(1.0);
    rep.push(Check::within(
        format!("{label}: gram_ind symmetry"),
        max_abs(&(&gp - p.transpose() * &g)),
        MATCH_TOL * sym_scale,
    ));
    if let Some(sign) = closure_sign(delta) {
        let sym = (&gp + gp.transpose()) * (0.5 * sign);
        let min_ev = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        rep.push(Check::within(
            format!("{label}: sign property"),
            (-min_ev).max(0.0),
            MATCH_TOL * sym_scale,
        ));
    }
    let a = model.operator();
    rep.push(Check::within(
        format!("{label}: commutation"),
        max_abs(&(&a * p - p * &a)),
        COMMUTE_TOL * model.scale(),
    ));
    let spec = restricted_spectrum(model, p);
    let outside = spec
        .iter()
        .filter(|&&x| !closure_contains(delta, x, 1e-9 * model.scale()))
        .count();
    rep.push(Check::flag(
        format!("{label}: spectral inclusion"),
        outside == 0,
    ));
    rep
}

/// Checks the spectral-calculus properties of the contour-built projections.
pub fn verify_spectral_calculus(
    model: &DiscretizedModel,
    d1: &SpectralInterval,
    d2: &SpectralInterval,
    spec: &ContourSpec,
) -> Result<Report, ContourError> {
    let p1 = contour_spectral_projection(model, d1, spec)?;
    let p2 = contour_spectral_projection(model, d2, spec)?;
    let mut rep = single_interval_checks(model, d1, &p1, "delta");
    rep.extend(single_interval_checks(model, d2, &p2, "delta'"));
    rep.push(Check::within(
        "product commutes",
        max_abs(&(&p1 * &p2 - &p2 * &p1)),
        ALGEBRA_TOL,
    ));
    if let Some(inter) = d1.intersect(d2) {
        let p12 = contour_spectral_projection(model, &inter, spec)?;
        rep.push(Check::within(
            "product = intersection",
            max_abs(&(&p1 * &p2 - &p12)),
            ALGEBRA_TOL,
        ));
        if let Some(union) = union_if_interval(d1, d2) {
            let pu = contour_spectral_projection(model, &union, spec)?;
            rep.push(Check::within(
                "additivity",
                max_abs(&(&p1 + &p2 - &p12 - &pu)),
                ALGEBRA_TOL,
            ));
        }
    }
    Ok(rep)
}

/// Union of two bounded intervals when it is again an interval.
pub fn union_if_interval(d1: &SpectralInterval, d2: &SpectralInterval) -> Option<SpectralInterval> {
    match (d1, d2) {
        (SpectralInterval::Empty, x) | (x, SpectralInterval::Empty) => Some(*x),
        (SpectralInterval::Bounded(a), SpectralInterval::Bounded(b)) => {
            let (first, second) = if a.lo <= b.lo { (a, b) } else { (b, a) };
            let joined = second.lo < first.hi
                || (second.lo == first.hi && (second.lo_closed || first.hi_closed));
            if !joined {
                return None;
            }
            let (hi, hi_closed) = if second.hi > first.hi {
                (second.hi, second.hi_closed)
            } else if first.hi > second.hi {
                (first.hi, first.hi_closed)
            } else {
                (first.hi, first.hi_closed || second.hi_closed)
            };
            let lo_closed = if first.lo == second.lo {
                first.lo_closed || second.lo_closed
            } else {
                first.lo_closed
            };
            Some(SpectralInterval::bounded(
                first.lo, hi, lo_closed, hi_closed,
            ))
        }
        _ => None,
    }
}

/// Tolerance factor for the algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-13;

/// `{v, v}_+ = sum x_i |v_i|^2 r_i w_i` against `sum x_i^2 |v_i|^2 (r_i/x_i) w_i`,
/// and against `sum_k [A E(Delta_k) v, v]` over a partition.
pub fn check_parseval_plus(
    model: &DiscretizedModel,
    v: &[Complex64],
    spec: &ContourSpec,
) -> Result<Report, ContourError> {
    let mut rep = Report::new();
    let terms = model.grid.iter().zip(&model.r).zip(&model.weights).zip(v);
    let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
    for (((&x, &r), &w), vi) in terms {
        let m = vi.norm_sqr();
        lhs += x * m * r * w;
        rhs += x * x * m * (r / x) * w;
        scale += (x * m * r * w).abs();
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    rep.push(Check::within(
        "parseval+: direct",
        (lhs - rhs).abs(),
        IDENTITY_TOL * scale,
    ));

    let (mut exact, mut partitioned) = (0.0, 0.0);
    for piece in partition(model) {
        let d = contour_diagonal(model, &piece, spec)?;
        for (i, p) in d.values.iter().enumerate() {
            let term = model.grid[i] * v[i].norm_sqr() * model.gram_ind[i];
            partitioned += (p * term).re;
            if piece.contains(model.grid[i]) {
                exact += term;
            }
        }
    }
    rep.push(Check::within(
        "parseval+: partition (spectral measure)",
        (exact - lhs).abs(),
        IDENTITY_TOL * scale,
    ));
    rep.push(Check::within(
        "parseval+: partition (contour projections)",
        (partitioned - lhs).abs(),
        MATCH_TOL * scale,
    ));
    Ok(rep)
}

/// At most eight consecutive intervals covering the grid, with endpoints
/// halfway between grid points.
pub fn partition(model: &DiscretizedModel) -> Vec<SpectralInterval> {
    let g = &model.grid;
    let n = g.len();
    let pad = if n > 1 {
        0.5 * (g[1] - g[0]).min(g[n - 1] - g[n - 2])
    } else {
        0.5
    };
    let pieces = n.min(8);
    let mut cuts = vec![g[0] - pad];
    for k in 1..pieces {
        let i = k * n / pieces;
        cuts.push(0.5 * (g[i - 1] + g[i]));
    }
    cuts.push(g[n - 1] + pad);
    cuts.windows(2)
        .map(|c| SpectralInterval::open(c[0], c[1]))
        .collect()
}

/// `[u, v] = sum u_i conj(v_i) r_i w_i` against `{A_- u, v}_- =
/// sum (x_i u_i) conj(v_i) (r_i / x_i) w_i`.
pub fn check_representation(model: &DiscretizedModel, u: &[Complex64], v: &[Complex64]) -> Check {
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for i in 0..model.len() {
        let (x, r, w) = (model.grid[i], model.r[i], model.weights[i]);
        lhs += u[i] * v[i].conj() * r * w;
        rhs += (u[i] * x) * v[i].conj() * (r / x) * w;
        scale += u[i].norm() * v[i].norm() * (r * w).abs();
    }
    Check::within(
        "representation",
        (lhs - rhs).norm(),
        IDENTITY_TOL * scale.max(f64::MIN_POSITIVE),
    )
}

/// `N` sorted points with random signs and `|x|` in `(1.05 eps, 10 eps)`,
/// pairwise at least `1e-3 eps` apart.
pub fn random_grid(seed: u64, n: usize, eps: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<f64> = Vec::with_capacity(n);
    while pts.len() < n {
        let mag = eps * rng.random_range(1.05..10.0);
        let x = if rng.random_bool(0.5) { mag } else { -mag };
        if pts.iter().all(|p| (p - x).abs() > 1e-3 * eps) {
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// Open interval with endpoints halfway between grid neighbours `i-1, i`
/// and `j-1, j` (indices `0` and `n` mean beyond the ends).
pub fn interval_between(grid: &[f64], i: usize, j: usize) -> SpectralInterval {
    let n = grid.len();
    let cut = |k: usize| -> f64 {
        if k == 0 {
            grid[0] - 1.0
        } else if k >= n {
            grid[n - 1] + 1.0
        } else {
            0.5 * (grid[k - 1] + grid[k])
        }
    };
    SpectralInterval::open(cut(i.min(j)), cut(i.max(j)))
}

/// Random pair of intervals plus one on each side of the gap.
pub fn random_intervals(seed: u64, grid: &[f64]) -> [SpectralInterval; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let n = grid.len();
    let mut pick = || {
        let i = rng.random_range(0..=n);
        let j = rng.random_range(0..=n);
        interval_between(grid, i, j)
    };
    let (d1, d2) = (pick(), pick());
    let first_pos = grid.iter().position(|&x| x > 0.0).unwrap_or(n);
    let positive = interval_between(grid, first_pos, n);
    let negative = interval_between(grid, 0, first_pos);
    [d1, d2, positive, negative]
}

/// Full randomized check of the spectral calculus on one model.
pub fn randomized_suite(
    seed: u64,
    n: usize,
    alpha: Alpha,
    ctx: &FormContext,
    spec: &ContourSpec,
) -> Result<Report, ContourError> {
    let grid = random_grid(seed, n, ctx.weight.epsilon());
    let model = build_discretized_model(alpha, ctx, &grid)?;
    let [d1, d2, pos, neg] = random_intervals(seed, &grid);
    let mut rep = verify_spectral_calculus(&model, &d1, &d2, spec)?;
    rep.extend(verify_spectral_calculus(&model, &pos, &neg, spec)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(17));
    let mut random_vec = || -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let (u, v) = (random_vec(), random_vec());
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let mut e0 = vec![Complex64::new(0.0, 0.0); n];
    e0[0] = Complex64::new(1.0, 0.0);
    rep.extend(check_parseval_plus(&model, &u, spec)?);
    rep.push(check_representation(&model, &e0, &ones));
    rep.push(check_representation(&model, &u, &v));
    rep.push(check_representation(&model, &ones, &ones));
    Ok(rep.scoped(&format!("seed {seed} N {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eight() -> Vec<f64> {
        vec![-4.5, -3.5, -2.5, -1.5, 1.5, 2.5, 3.5, 4.5]
    }

    fn model(alpha: f64) -> DiscretizedModel {
        build_discretized_model(
            Alpha::new(alpha).unwrap(),
            &FormContext::default(),
            &eight(),
        )
        .unwrap()
    }

    #[test]
    fn eight_point_signs_and_blocks() {
        let m = model(0.0);
        let signs: Vec<f64> = m.gram_ind.iter().map(|g| g.signum()).collect();
        assert_eq!(signs, vec![-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0]);
        // Mirror cells i and 7 - i form [[sqrt2 m, -m], [-m, sqrt2 m]].
        for i in 0..4 {
            let mass = m.weights[i];
            let j = 7 - i;
            assert!((m.gram_pos[(i, i)] - 2f64.sqrt() * mass).abs() < 1e-10);
            assert!((m.gram_pos[(j, j)] - 2f64.sqrt() * mass).abs() < 1e-10);
            assert!((m.gram_pos[(i, j)] + mass).abs() < 1e-10);
            for k in 0..8 {
                if k != i && k != j {
                    assert_eq!(m.gram_pos[(i, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn bad_grids_rejected() {
        let ctx = FormContext::default();
        let a = Alpha::new(1.0).unwrap();
        assert!(matches!(
            build_discretized_model(a, &ctx, &[]),
            Err(ContourError::GapViolation { .. })
        ));
        assert!(matches!(
            build_discretized_model(a, &ctx, &[-2.0, 0.5, 3.0]),
            Err(ContourError::GapViolation { .. })
        ));
        assert!(matches!(
            build_discretized_model(a, &ctx, &[2.0, 2.0]),
            Err(ContourError::GapViolation { .. })
        ));
    }

    #[test]
    fn resolvent() {
        let m = model(1.0);
        let mut e1 = vec![Complex64::new(0.0, 0.0); 8];
        e1[0] = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let out = resolvent_apply(&m, i, &e1).unwrap();
        assert!((out[0] - 1.0 / (Complex64::new(-4.5, 0.0) - i)).norm() < 1e-15);
        let v: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let z = Complex64::new(0.3, 0.7);
        let back: Vec<Complex64> = resolvent_apply(&m, z, &v)
            .unwrap()
            .iter()
            .zip(&m.grid)
            .map(|(y, &x)| y * (x - z))
            .collect();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(resolvent_apply(&m, Complex64::new(0.0, 0.0), &v).is_ok());
        assert!(matches!(
            resolvent_apply(&m, Complex64::new(2.5, 0.0), &v),
            Err(ContourError::PoleHit { .. })
        ));
    }

    #[test]
    fn projection_matches_residue_count() {
        let m = model(1.0);
        let spec = ContourSpec::default();
        let p = contour_spectral_projection(&m, &SpectralInterval::open(2.0, 4.0), &spec).unwrap();
        let mut expect = DMatrix::zeros(8, 8);
        expect[(5, 5)] = 1.0;
        expect[(6, 6)] = 1.0;
        assert!(max_abs(&(p - expect)) < 1e-6);
        let z = contour_spectral_projection(&m, &SpectralInterval::open(5.0, 6.0), &spec).unwrap();
        assert!(max_abs(&z) < 1e-6);
        let l = contour_spectral_projection(&m, &SpectralInterval::open(-3.0, 0.0), &spec).unwrap();
        let r = contour_spectral_projection(&m, &SpectralInterval::open(0.0, 3.0), &spec).unwrap();
        let u = contour_spectral_projection(&m, &SpectralInterval::open(-3.0, 3.0), &spec).unwrap();
        assert!(max_abs(&(l + r - u)) < 2e-6);
        let c = contour_spectral_projection(
            &m,
            &SpectralInterval::complement_of(-3.0, 3.0, false, false),
            &spec,
        )
        .unwrap();
        let outer =
            model(1.0).characteristic(&SpectralInterval::complement_of(-3.0, 3.0, false, false));
        assert!(max_abs(&(c - outer)) < 1e-6);
    }

    #[test]
    fn delta_independence_and_endpoint_on_spectrum() {
        let m = model(1.0);
        let spec = ContourSpec::default();
        let d = contour_diagonal(&m, &SpectralInterval::open(2.0, 4.0), &spec).unwrap();
        assert!(d.delta_change <= 1e-8, "{d:?}");
        assert!(matches!(
            contour_diagonal(&m, &SpectralInterval::open(2.5, 4.0), &spec),
            Err(ContourError::EndpointOnSpectrum { .. })
        ));
    }

    #[test]
    fn node_doubling_reduces_error() {
        let m = model(1.0);
        let delta = SpectralInterval::open(2.4, 4.0);
        let err = |nodes: usize| {
            let spec = ContourSpec {
                nodes_per_segment: nodes,
                epsilon_schedule: vec![0.5],
                delta_schedule: vec![1e-11],
                max_panel: 8.0,
                grading: 1e12,
                ..ContourSpec::default()
            };
            let d = contour_diagonal(&m, &delta, &spec).unwrap();
            d.values
                .iter()
                .zip(&m.grid)
                .map(|(v, &x)| (v - if delta.contains(x) { 1.0 } else { 0.0 }).norm())
                .fold(0.0, f64::max)
        };
        let (e16, e32) = (err(16), err(32));
        assert!(e16 > 1e-9, "{e16:e}");
        assert!(e32 <= (e16 / 4.0).max(1e-11), "{e16:e} {e32:e}");
    }

    #[test]
    fn spectral_calculus_on_eight_points() {
        let m = model(0.5);
        let spec = ContourSpec::default();
        let rep = verify_spectral_calculus(
            &m,
            &SpectralInterval::open(2.0, 5.0),
            &SpectralInterval::open(-3.0, 3.0),
            &spec,
        )
        .unwrap();
        assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
        let p = contour_spectral_projection(&m, &SpectralInterval::open(2.0, 5.0), &spec).unwrap();
        let ev = restricted_spectrum(&m, &p);
        assert_eq!(ev.len(), 3);
        for (a, b) in ev.iter().zip([2.5, 3.5, 4.5]) {
            assert!((a - b).abs() < 1e-9);
        }
        let empty = verify_spectral_calculus(
            &m,
            &SpectralInterval::Empty,
            &SpectralInterval::Empty,
            &spec,
        )
        .unwrap();
        assert!(empty.passed());
    }

    #[test]
    fn identities_on_eight_points() {
        let m = model(2.0);
        let spec = ContourSpec::default();
        let mut e1 = vec![Complex64::new(0.0, 0.0); 8];
        e1[0] = Complex64::new(1.0, 0.0);
        let rep = check_parseval_plus(&m, &e1, &spec).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        assert!(check_parseval_plus(&m, &ones, &spec).unwrap().passed());
        assert!(check_representation(&m, &e1, &ones).passed);
        assert!(check_representation(&m, &ones, &ones).passed);
    }

    #[test]
    fn randomized_small() {
        let ctx = FormContext::default();
        let spec = ContourSpec::default();
        for seed in 0..3 {
            let rep = randomized_suite(seed, 8, Alpha::new(1.0).unwrap(), &ctx, &spec).unwrap();
            assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
        }
    }
}
