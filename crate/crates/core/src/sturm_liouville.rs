//! The indefinite Sturm-Liouville problem `-(p u')' = lambda u` on `[-1, 1]`
//! with Dirichlet ends and a weight `p` that degenerates like
//! `x |log|x||^3` at the turning point `0`.
//!
//! Discretization is conservative finite differences on a mesh graded
//! towards `0`: stiffness `K` from `p` at cell midpoints and lumped mass `M`.
//! Eigenpairs of the pencil `K - lambda M` are found closest to `0` on each
//! side by Sturm-count bisection followed by shifted inverse iteration.

use std::f64::consts::E;
use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::{
    integrate_half_line, integrate_interval, GaussLegendre, IntegrationResult, QuadratureConfig,
    QuadratureError, Status,
};

#[derive(Debug, Error)]
pub enum SlError {
    #[error("x = {0} lies outside [-1, 1]")]
    DomainViolation(f64),
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),
    #[error("eigen-iteration failed: {0}")]
    ConvergenceFailure(String),
    #[error("schedule value m = {m} exceeds the computed spectrum (covered up to {covered})")]
    ScheduleExceedsSpectrum { m: f64, covered: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn check_domain(x: f64) -> Result<(), SlError> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(SlError::DomainViolation(x))
    }
}

/// The coefficient `p`.
pub fn eval_p(x: f64) -> Result<f64, SlError> {
    check_domain(x)?;
    Ok(if x <= -2.0 / E {
        -(2.0 / E) * (1.0 - 2f64.ln()).powi(3)
    } else if x == 0.0 {
        0.0
    } else if x < 1.0 / E {
        x * x.abs().ln().abs().powi(3)
    } else {
        1.0 / E
    })
}

/// The function `u_0`, zero on `[-1, 0]`.
pub fn eval_u0(x: f64) -> Result<f64, SlError> {
    check_domain(x)?;
    Ok(if x <= 0.0 {
        0.0
    } else if x < 1.0 / E {
        8.0 / (9.0 * x.ln().abs().powf(9.0 / 8.0))
    } else {
        8.0 / 9.0 - 8.0 * (E * x - 1.0) / (9.0 * (E - 1.0))
    })
}

/// `u_0'` from the branch formulas (undefined at `0` and `1/e`; the
/// right-hand branch is used there).
pub fn eval_u0_prime(x: f64) -> Result<f64, SlError> {
    check_domain(x)?;
    Ok(if x <= 0.0 {
        0.0
    } else if x < 1.0 / E {
        (-x.ln()).powf(-17.0 / 8.0) / x
    } else {
        -8.0 * E / (9.0 * (E - 1.0))
    })
}

/// `int_{-1}^{1} |p| |u_0'|^2 dx`.
///
/// On `(0, 1/e)` the substitution `x = e^-t` maps the singular end to an
/// infinite tail; `|p|` and `u_0'` are evaluated in log form there so that
/// `x` never underflows.
pub fn u0_dom_t_integral(cfg: &QuadratureConfig) -> Result<IntegrationResult, SlError> {
    // x = e^-t, |log x| = t: log|p| = -t + 3 ln t, log u0' = t - (17/8) ln t.
    let h = |t: f64| {
        let log_p = -t + 3.0 * t.ln();
        let log_du = t - 17.0 / 8.0 * t.ln();
        Complex64::new((log_p + 2.0 * log_du - t).exp(), 0.0)
    };
    let mut c = *cfg;
    if c.k0 <= 1.0 {
        c.k0 = 2.0;
    }
    let singular = integrate_half_line(&h, 1.0, &[], None, &c)?;
    let rule = GaussLegendre::new(cfg.nodes_per_panel);
    let lin = |x: f64| {
        let p = eval_p(x).unwrap_or(f64::NAN);
        let d = eval_u0_prime(x).unwrap_or(f64::NAN);
        Complex64::new(p.abs() * d * d, 0.0)
    };
    let (v, e) = integrate_interval(&lin, 1.0 / E, 1.0, &[], &rule, cfg)?;
    let linear = IntegrationResult {
        value: v,
        abs_error_estimate: e,
        status: Status::Converged,
        tail_exponent: None,
    };
    let one = Complex64::new(1.0, 0.0);
    Ok(IntegrationResult::combine(&[
        (one, &singular),
        (one, &linear),
    ]))
}

/// Mesh, cell coefficients and grading of the discrete problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SlProblem {
    pub nodes: Vec<f64>,
    pub p_mid: Vec<f64>,
    pub grading: f64,
}

/// `y_j = sgn(xi_j) |xi_j|^gamma` with `xi` uniform on `[-1, 1]`.
pub fn graded_mesh(cells: usize, grading: f64) -> Vec<f64> {
    (0..=cells)
        .map(|j| {
            let xi = (2.0 * j as f64 - cells as f64) / cells as f64;
            xi.signum() * xi.abs().powf(grading)
        })
        .map(|y| if y == -0.0 { 0.0 } else { y })
        .collect()
}

impl SlProblem {
    /// The example's coefficient on a graded mesh with `cells` (even) cells.
    pub fn new(cells: usize, grading: f64) -> Result<Self, SlError> {
        if cells < 4 || !cells.is_multiple_of(2) {
            return Err(SlError::MeshTooCoarse(format!(
                "need an even number of at least 4 cells so that 0 is a node, got {cells}"
            )));
        }
        if !(grading >= 1.0) {
            return Err(SlError::MeshTooCoarse(format!("grading {grading} below 1")));
        }
        let mut p = Self::with_coefficient(graded_mesh(cells, grading), |x| {
            eval_p(x).unwrap_or(f64::NAN)
        })?;
        p.grading = grading;
        Ok(p)
    }

    /// Arbitrary coefficient; a sign change of `p` is allowed only at a node.
    pub fn with_coefficient(nodes: Vec<f64>, p: impl Fn(f64) -> f64) -> Result<Self, SlError> {
        if nodes.len() < 3 {
            return Err(SlError::MeshTooCoarse("need an interior node".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SlError::MeshTooCoarse(
                "nodes not strictly increasing".into(),
            ));
        }
        for w in nodes.windows(2) {
            let (pa, pb) = (
                p(w[0] + 1e-12 * (w[1] - w[0])),
                p(w[1] - 1e-12 * (w[1] - w[0])),
            );
            if pa * pb < 0.0 {
                return Err(SlError::MeshTooCoarse(format!(
                    "cell [{}, {}] spans a sign change of p",
                    w[0], w[1]
                )));
            }
        }
        let p_mid: Vec<f64> = nodes.windows(2).map(|w| p(0.5 * (w[0] + w[1]))).collect();
        if let Some(i) = p_mid.iter().position(|v| !v.is_finite()) {
            return Err(SlError::MeshTooCoarse(format!("p not finite in cell {i}")));
        }
        Ok(Self {
            nodes,
            p_mid,
            grading: 1.0,
        })
    }

    /// Number of interior nodes (unknowns).
    pub fn dim(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Lumped mass at interior nodes.
    pub fn mass(&self) -> Vec<f64> {
        let h = self.widths();
        h.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Interior nodal values of `f`.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes[1..self.nodes.len() - 1]
            .iter()
            .map(|&x| f(x))
            .collect()
    }
}

/// Symmetric tridiagonal stiffness `K` and diagonal mass `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlOperator {
    pub diag: Vec<f64>,
    /// `K[i][i+1] = K[i+1][i]`.
    pub off: Vec<f64>,
    pub mass: Vec<f64>,
}

/// `u^T K u = sum p_mid (Delta u)^2 / h` with Dirichlet rows eliminated.
pub fn assemble_operator(problem: &SlProblem) -> SlOperator {
    let h = problem.widths();
    let c: Vec<f64> = problem.p_mid.iter().zip(&h).map(|(p, h)| p / h).collect();
    let n = problem.dim();
    let diag = (0..n).map(|i| c[i] + c[i + 1]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| -c[i + 1]).collect();
    SlOperator {
        diag,
        off,
        mass: problem.mass(),
    }
}

impl SlOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.off[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// Discrete form `t[u, v] = u^T K v`.
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &self.apply(v))
    }

    /// Discrete `(u, v)` in the lumped mass inner product.
    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.mass)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    /// Dense `K`, for inspection.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// Number of eigenvalues of the pencil below `sigma` (Sylvester inertia
    /// of the `LDL^T` factorization of `K - sigma M`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let a = self.diag[i] - sigma * self.mass[i];
            let b2 = if i > 0 { self.off[i - 1].powi(2) } else { 0.0 };
            q = if i > 0 { a - b2 / q } else { a };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + (sigma * self.mass[i]).abs())
                    - f64::MIN_POSITIVE;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Solves `(K - sigma M) x = rhs` by elimination with partial pivoting.
    fn shifted_solve(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut d: Vec<f64> = (0..n)
            .map(|i| self.diag[i] - sigma * self.mass[i])
            .collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut b = rhs.to_vec();
        let tiny = f64::EPSILON
            * self
                .diag
                .iter()
                .zip(&self.mass)
                .fold(0.0f64, |m, (k, ms)| m.max(k.abs() + (sigma * ms).abs()));
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                b[i + 1] -= f * b[i];
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let t = d[i + 1];
                d[i + 1] = du[i] - f * t;
                du[i] = t;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                b.swap(i, i + 1);
                b[i + 1] -= f * b[i];
            }
            dl[i] = 0.0;
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// `n` in `..., -2, -1, 1, 2, ...` by sign and magnitude.
    pub index: i64,
    pub lambda: f64,
    /// Interior nodal values, normed by `|lambda| (u, u) = 1`.
    pub u: Vec<f64>,
    pub residual: f64,
}

/// `k`-th eigenvalue (0-based, ascending) of the pencil by bisection.
fn bisect(op: &SlOperator, k: usize) -> f64 {
    let mut lo = -1.0;
    while op.count_below(lo) > k {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while op.count_below(hi) <= k {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * mid.abs() {
            break;
        }
        if op.count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenpairs closest to `0`: up to `count_per_sign` on each side.
pub fn compute_eigenpairs(
    op: &SlOperator,
    count_per_sign: usize,
) -> Result<Vec<EigenPair>, SlError> {
    let n = op.dim();
    let neg = op.count_below(0.0);
    let mut targets: Vec<(i64, usize)> = Vec::new();
    for j in 0..count_per_sign.min(neg) {
        targets.push((-(j as i64) - 1, neg - 1 - j));
    }
    for j in 0..count_per_sign.min(n - neg) {
        targets.push((j as i64 + 1, neg + j));
    }
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(targets.len());
    let scale = op.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    for (index, k) in targets {
        let shift = bisect(op, k);
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin())
            .collect();
        normalize_mass(op, &mut x);
        for _ in 0..4 {
            let rhs: Vec<f64> = x.iter().zip(&op.mass).map(|(a, m)| a * m).collect();
            x = op.shifted_solve(shift, &rhs);
            // Keep clustered neighbours apart.
            for p in pairs
                .iter()
                .filter(|p| (p.lambda - shift).abs() <= 1e-8 * shift.abs())
            {
                let c = op.mass_inner(&x, &p.u) / op.mass_inner(&p.u, &p.u);
                for (xi, ui) in x.iter_mut().zip(&p.u) {
                    *xi -= c * ui;
                }
            }
            normalize_mass(op, &mut x);
        }
        let kx = op.apply(&x);
        let lambda = dot(&x, &kx);
        let res: f64 = kx
            .iter()
            .zip(&x)
            .zip(&op.mass)
            .map(|((k, xi), m)| (k - lambda * m * xi).abs())
            .fold(0.0, f64::max);
        if !(lambda.is_finite() && res <= 1e-6 * scale.max(1.0))
            || lambda.signum() != index.signum() as f64
        {
            return Err(SlError::ConvergenceFailure(format!(
                "pair {index}: lambda {lambda}, residual {res:e}"
            )));
        }
        // Deterministic sign: largest component positive.
        let big = x
            .iter()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        let s = big.signum() / lambda.abs().sqrt();
        let u: Vec<f64> = x.iter().map(|v| v * s).collect();
        let residual = (1.0 - lambda.abs() * op.mass_inner(&u, &u)).abs();
        pairs.push(EigenPair {
            index,
            lambda,
            u,
            residual,
        });
    }
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(pairs)
}

fn normalize_mass(op: &SlOperator, x: &mut [f64]) {
    let nrm = op.mass_inner(x, x).sqrt();
    if nrm > 0.0 {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
}

/// Smallest `|lambda|` among computed pairs; no eigenvalue lies closer to `0`.
pub fn spectral_gap(op: &SlOperator, pairs: &[EigenPair]) -> Option<f64> {
    let gap = pairs
        .iter()
        .map(|p| p.lambda.abs())
        .fold(f64::INFINITY, f64::min);
    // The inertia at +-gap/2 confirms nothing was skipped.
    let below = op.count_below(-0.5 * gap);
    let above = op.count_below(0.5 * gap);
    (gap.is_finite() && below == above).then_some(gap)
}

/// `c_n = t[u_0, u_n] = int u_0' u_n' p`, with `u_0'` exact at midpoints.
pub fn expansion_coefficients(problem: &SlProblem, pairs: &[EigenPair]) -> Vec<f64> {
    let grad: Vec<f64> = problem
        .nodes
        .windows(2)
        .zip(&problem.p_mid)
        .map(|(w, p)| p * eval_u0_prime(0.5 * (w[0] + w[1])).unwrap_or(0.0))
        .collect();
    pairs
        .iter()
        .map(|pair| {
            let n = pair.u.len();
            (0..=n)
                .map(|c| {
                    let right = if c < n { pair.u[c] } else { 0.0 };
                    let left = if c > 0 { pair.u[c - 1] } else { 0.0 };
                    grad[c] * (right - left)
                })
                .sum()
        })
        .collect()
}

/// `c_n = t[u, u_n]` for a nodal `u`.
pub fn expansion_coefficients_nodal(op: &SlOperator, u: &[f64], pairs: &[EigenPair]) -> Vec<f64> {
    let ku = op.apply(u);
    pairs.iter().map(|p| dot(&ku, &p.u)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub m: f64,
    /// Positive-form norms `(sum |c_n|^2)^(1/2)` over the included terms.
    pub norm_s: f64,
    pub norm_s_plus: f64,
    pub norm_s_minus: f64,
    /// `t[S_m, S_m]` from the discrete form.
    pub t_form: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub coefficients: Vec<f64>,
    pub rows: Vec<TrajectoryRow>,
    /// Last over first value of each one-sided norm.
    pub growth_plus: f64,
    pub growth_minus: f64,
    /// Log-log slope of the two-sided norm against `m`.
    pub growth_rate: f64,
    pub monotone_plus: bool,
    pub monotone_minus: bool,
    /// The last partial sum, nodal.
    pub last_sum: Vec<f64>,
}

impl ExpansionReport {
    pub fn max_growth(&self) -> f64 {
        self.growth_plus.max(self.growth_minus)
    }
}

/// Geometric schedule of `points` values covering the computed spectrum.
pub fn default_schedule(pairs: &[EigenPair], points: usize) -> Vec<f64> {
    let lo = pairs
        .iter()
        .map(|p| p.lambda.abs())
        .fold(f64::INFINITY, f64::min);
    let hi = covered_radius(pairs);
    if !(lo.is_finite() && hi >= lo) || points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// `|lambda|` up to which both signs are fully computed.
pub fn covered_radius(pairs: &[EigenPair]) -> f64 {
    let top = |sign: f64| {
        pairs
            .iter()
            .filter(|p| p.lambda.signum() == sign)
            .map(|p| p.lambda.abs())
            .fold(0.0, f64::max)
    };
    top(1.0).min(top(-1.0))
}

/// `S_m = sum_{|lambda_n| <= m} sgn(lambda_n) c_n u_n` and its one-sided parts.
pub fn partial_sum_study(
    op: &SlOperator,
    coefficients: &[f64],
    pairs: &[EigenPair],
    schedule: &[f64],
) -> Result<ExpansionReport, SlError> {
    let covered = covered_radius(pairs);
    if let Some(&m) = schedule.iter().find(|&&m| m > covered * (1.0 + 1e-12)) {
        return Err(SlError::ScheduleExceedsSpectrum { m, covered });
    }
    let n = op.dim();
    let mut rows = Vec::with_capacity(schedule.len());
    let mut last_sum = vec![0.0; n];
    for &m in schedule {
        let mut s = vec![0.0; n];
        let (mut plus, mut minus, mut terms) = (0.0, 0.0, 0);
        for (p, &c) in pairs.iter().zip(coefficients) {
            if p.lambda.abs() > m {
                continue;
            }
            terms += 1;
            let sc = p.lambda.signum() * c;
            for (si, ui) in s.iter_mut().zip(&p.u) {
                *si += sc * ui;
            }
            if p.lambda > 0.0 {
                plus += c * c;
            } else {
                minus += c * c;
            }
        }
        rows.push(TrajectoryRow {
            m,
            norm_s: (plus + minus).sqrt(),
            norm_s_plus: plus.sqrt(),
            norm_s_minus: minus.sqrt(),
            t_form: op.form(&s, &s),
            terms,
        });
        last_sum = s;
    }
    let growth = |f: fn(&TrajectoryRow) -> f64| -> f64 {
        let first = rows.iter().map(f).find(|v| *v > 0.0);
        match (first, rows.last().map(f)) {
            (Some(a), Some(b)) => b / a,
            _ => 1.0,
        }
    };
    let monotone = |f: fn(&TrajectoryRow) -> f64| rows.windows(2).all(|w| f(&w[1]) >= f(&w[0]));
    let growth_rate = crate::eigenspectral::fit_loglog(rows.iter().map(|r| (r.m, r.norm_s)));
    Ok(ExpansionReport {
        coefficients: coefficients.to_vec(),
        growth_plus: growth(|r| r.norm_s_plus),
        growth_minus: growth(|r| r.norm_s_minus),
        growth_rate,
        monotone_plus: monotone(|r| r.norm_s_plus),
        monotone_minus: monotone(|r| r.norm_s_minus),
        rows,
        last_sum,
    })
}

pub fn write_eigenvalues_csv<W: Write>(pairs: &[EigenPair], mut out: W) -> io::Result<()> {
    writeln!(out, "n,lambda,residual")?;
    for p in pairs {
        writeln!(out, "{},{},{}", p.index, p.lambda, p.residual)?;
    }
    Ok(())
}

pub fn write_coefficients_csv<W: Write>(
    pairs: &[EigenPair],
    coefficients: &[f64],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "n,lambda,c_n")?;
    for (p, c) in pairs.iter().zip(coefficients) {
        writeln!(out, "{},{},{}", p.index, p.lambda, c)?;
    }
    Ok(())
}

pub fn write_trajectories_csv<W: Write>(report: &ExpansionReport, mut out: W) -> io::Result<()> {
    writeln!(out, "m,norm_S,norm_S_plus,norm_S_minus")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.m, r.norm_s, r.norm_s_plus, r.norm_s_minus
        )?;
    }
    Ok(())
}

/// Largest `|t[u_m, u_n]|` over distinct computed pairs.
pub fn max_off_orthogonality(op: &SlOperator, pairs: &[EigenPair]) -> f64 {
    let ku: Vec<Vec<f64>> = pairs.iter().map(|p| op.apply(&p.u)).collect();
    let mut worst = 0.0f64;
    for i in 0..pairs.len() {
        for j in 0..i {
            worst = worst.max(dot(&ku[i], &pairs[j].u).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_values() {
        assert_eq!(eval_p(0.0).unwrap(), 0.0);
        assert!((eval_p(-1.0).unwrap() + 0.021_258_169_615_34).abs() < 1e-13);
        assert!((eval_p(0.5).unwrap() - 1.0 / E).abs() < 1e-15);
        assert!((eval_p(0.2).unwrap() - 0.833_782_312_857_130_5).abs() < 1e-13);
        assert!(matches!(eval_p(1.5), Err(SlError::DomainViolation(_))));
        // Continuity at the branch points.
        for x in [-2.0 / E, 1.0 / E] {
            assert!((eval_p(x - 1e-12).unwrap() - eval_p(x + 1e-12).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn u0_values() {
        assert_eq!(eval_u0(-0.5).unwrap(), 0.0);
        assert!((eval_u0(1.0 / E).unwrap() - 8.0 / 9.0).abs() < 1e-14);
        assert!(eval_u0(1.0).unwrap().abs() < 1e-15);
        assert!(eval_u0(-1.0).unwrap() == 0.0);
        assert!(matches!(eval_u0(-1.01), Err(SlError::DomainViolation(_))));
        // Analytic derivative against a central difference.
        for x in [0.01, 0.1, 0.3, 0.6] {
            let h = 1e-6;
            let fd = (eval_u0(x + h).unwrap() - eval_u0(x - h).unwrap()) / (2.0 * h);
            let d = eval_u0_prime(x).unwrap();
            assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "{x}: {fd} {d}");
        }
    }

    #[test]
    fn u0_in_form_domain() {
        let r = u0_dom_t_integral(&QuadratureConfig::default()).unwrap();
        assert_eq!(r.status, Status::Converged);
        let exact = 4.0 + 64.0 / (81.0 * (E - 1.0));
        assert!((r.value.re - exact).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn constant_coefficient_laplacian() {
        let prob = SlProblem::with_coefficient(graded_mesh(400, 1.0), |_| 1.0).unwrap();
        let op = assemble_operator(&prob);
        let k = op.to_dense();
        assert_eq!((&k - k.transpose()).amax(), 0.0);
        let pairs = compute_eigenpairs(&op, 3).unwrap();
        assert!(pairs.iter().all(|p| p.lambda > 0.0));
        let pi = std::f64::consts::PI;
        for (j, p) in pairs.iter().enumerate() {
            let exact = ((j + 1) as f64 * pi / 2.0).powi(2);
            assert!(
                (p.lambda - exact).abs() < 1e-3 * exact,
                "{} vs {exact}",
                p.lambda
            );
        }
    }

    #[test]
    fn form_has_both_signs() {
        let prob = SlProblem::new(64, 3.0).unwrap();
        let op = assemble_operator(&prob);
        let bump = |c: f64| prob.sample(|x| (1.0 - ((x - c) / 0.2).powi(2)).max(0.0));
        assert!(op.form(&bump(-0.5), &bump(-0.5)) < 0.0);
        assert!(op.form(&bump(0.5), &bump(0.5)) > 0.0);
    }

    #[test]
    fn mesh_rules() {
        assert!(matches!(
            SlProblem::new(63, 3.0),
            Err(SlError::MeshTooCoarse(_))
        ));
        let nodes = vec![-1.0, -0.3, 0.4, 1.0];
        assert!(matches!(
            SlProblem::with_coefficient(nodes, |x| eval_p(x).unwrap()),
            Err(SlError::MeshTooCoarse(_))
        ));
        let p = SlProblem::new(16, 3.0).unwrap();
        assert!(p.nodes.contains(&0.0));
    }

    #[test]
    fn eigenpairs_on_small_mesh() {
        let prob = SlProblem::new(512, 3.0).unwrap();
        let op = assemble_operator(&prob);
        let pairs = compute_eigenpairs(&op, 8).unwrap();
        assert_eq!(pairs.len(), 16);
        let l1 = pairs.iter().find(|p| p.index == 1).unwrap().lambda;
        let lm1 = pairs.iter().find(|p| p.index == -1).unwrap().lambda;
        assert!(lm1 < 0.0 && 0.0 < l1);
        assert!(pairs.windows(2).all(|w| w[0].lambda < w[1].lambda));
        assert!(pairs.iter().all(|p| p.residual <= 1e-10));
        assert!(max_off_orthogonality(&op, &pairs) <= 1e-6);
        assert!(spectral_gap(&op, &pairs).is_some());
        // c_n of an eigenfunction against the others.
        let u3 = &pairs.iter().find(|p| p.index == 3).unwrap().u;
        let c = expansion_coefficients_nodal(&op, u3, &pairs);
        for (p, c) in pairs.iter().zip(&c) {
            let expect = if p.index == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-6, "{} {c}", p.index);
        }
    }

    #[test]
    fn partial_sums_reproduce_finite_combinations() {
        let prob = SlProblem::new(256, 3.0).unwrap();
        let op = assemble_operator(&prob);
        let pairs = compute_eigenpairs(&op, 5).unwrap();
        let get = |i: i64| pairs.iter().find(|p| p.index == i).unwrap();
        let u: Vec<f64> = get(1)
            .u
            .iter()
            .zip(&get(-2).u)
            .map(|(a, b)| a + 2.0 * b)
            .collect();
        let c = expansion_coefficients_nodal(&op, &u, &pairs);
        let m = get(1).lambda.max(get(-2).lambda.abs());
        let rep = partial_sum_study(&op, &c, &pairs, &[m, covered_radius(&pairs)]).unwrap();
        let err = rep
            .last_sum
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!((rep.rows[0].norm_s - rep.rows[1].norm_s).abs() < 1e-8);

        let single = expansion_coefficients_nodal(&op, &get(1).u, &pairs);
        let rep = partial_sum_study(&op, &single, &pairs, &default_schedule(&pairs, 5)).unwrap();
        for r in &rep.rows[..] {
            if r.m >= get(1).lambda {
                assert!((r.norm_s - 1.0).abs() < 1e-8);
            }
        }
        assert!(matches!(
            partial_sum_study(&op, &single, &pairs, &[1e12]),
            Err(SlError::ScheduleExceedsSpectrum { .. })
        ));
        let zero = expansion_coefficients_nodal(&op, &vec![0.0; op.dim()], &pairs);
        assert!(zero.iter().all(|c| *c == 0.0));
    }
}
