//! Named invariant suites. Each returns a [`Report`] with one check per
//! verified property; the names are the keys accepted by `kcl verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eigenspectral::{
    classify_infinity, divergence_witness, estimate_projection_norm, growth_curve, Classification,
    EigenError, GridSpec, SpectralInterval, DEFAULT_EXPONENT_MARGIN,
};
use crate::forms::{apply_s_alpha, project_pm, FormContext, FormError, InnerProductKind, Sign};
use crate::langer_contour::{
    build_discretized_model, check_parseval_plus, check_representation, random_grid,
    randomized_suite, ContourError, ContourSpec,
};
use crate::membership::{MembershipError, MembershipOracle, Verdict};
use crate::model_space::{
    make_f_tau, make_g_tau, truncate, Alpha, ModelError, ModelWeight, TestFunction, Weight,
    WeightKind,
};
use crate::quadrature::{
    integrate_interval, GaussLegendre, QuadratureConfig, QuadratureError, Status,
};
use crate::report::{Check, Report};
use crate::sturm_liouville::{
    assemble_operator, compute_eigenpairs, default_schedule, eval_u0, expansion_coefficients,
    max_off_orthogonality, partial_sum_study, spectral_gap, u0_dom_t_integral, SlError, SlProblem,
};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    SturmLiouville(#[from] SlError),
}

/// Suite keys, in run order for `all`.
pub const SUITES: &[&str] = &[
    "lemma-6.1",
    "lemma-6.2",
    "lemma-6.3",
    "lemma-6.4",
    "prop-6.5",
    "lemma-6.6",
    "lemma-6.7",
    "prop-6.8",
    "thm-6.9",
    "cor-6.10",
    "cor-6.11",
    "thm-2.1",
    "cor-5.6",
    "lemma-3.1",
    "example-5.1",
];

/// Parameters shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub weight: ModelWeight,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    /// Closure indices for grid-based suites.
    pub alphas: Vec<f64>,
    /// Random function pairs per `alpha`.
    pub random_pairs: usize,
    /// Random seeds for discretized models.
    pub seeds: usize,
    pub model_sizes: Vec<usize>,
    /// Largest `j` in the growth schedule `k = 2^j`.
    pub growth_max_power: i32,
    pub sl_cells: usize,
    pub sl_grading: f64,
    pub sl_pairs_per_sign: usize,
    pub sl_schedule_points: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            weight: ModelWeight::default(),
            quadrature: QuadratureConfig::default(),
            seed: 0,
            alphas: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            random_pairs: 20,
            seeds: 10,
            model_sizes: vec![8, 32, 128],
            growth_max_power: 12,
            sl_cells: 4096,
            sl_grading: 3.0,
            sl_pairs_per_sign: 100,
            sl_schedule_points: 16,
        }
    }
}

impl SuiteConfig {
    pub fn context(&self) -> FormContext {
        FormContext::new(self.weight.clone(), self.quadrature)
    }

    fn alpha_list(&self) -> Result<Vec<Alpha>, SuiteError> {
        Ok(self
            .alphas
            .iter()
            .map(|&a| Alpha::new(a))
            .collect::<Result<_, _>>()?)
    }
}

/// Runs one suite by key, or every suite for `all`.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    if name == "all" {
        let mut rep = Report::new();
        for s in SUITES {
            rep.extend(run_suite(s, cfg)?);
        }
        return Ok(rep);
    }
    let rep = match name {
        "lemma-6.1" => weight_identities(&cfg.weight),
        "lemma-6.2" => q_representation(cfg)?,
        "lemma-6.3" | "cor-6.11" => membership_pattern(cfg)?,
        "lemma-6.4" => involution(cfg)?,
        "prop-6.5" => hilbert_triplet(cfg)?,
        "lemma-6.6" => krein_structure(cfg)?,
        "lemma-6.7" => principal_limit(cfg)?,
        "prop-6.8" => growth_bounds(cfg)?,
        "thm-6.9" => critical_point(cfg)?,
        "cor-6.10" => regular_closure(cfg)?,
        "thm-2.1" => contour_calculus(cfg)?,
        "cor-5.6" => parseval_plus(cfg)?,
        "lemma-3.1" => representation_identity(cfg)?,
        "example-5.1" => sturm_liouville(cfg)?,
        other => return Err(SuiteError::UnknownSuite(other.to_string())),
    };
    Ok(rep.scoped(name))
}

/// `eta_0 / |r| = sqrt2 - 1` and the two-sided bound on `eta_alpha / eta~_alpha`.
pub fn weight_identities(w: &ModelWeight) -> Report {
    let mut rep = Report::new();
    let eps = w.epsilon();
    let eta0 = w.derived(WeightKind::Eta(Alpha::new(0.0).expect("valid")));
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let mag = eps * (1.0 + 1e-9) * 1e6f64.powf(i as f64 / 999.0);
        let x = if i % 2 == 0 { mag } else { -mag };
        let ratio = eta0.eval(x) / w.eval(x).abs();
        worst = worst.max((ratio - (2f64.sqrt() - 1.0)).abs());
    }
    rep.push(Check::within(
        "eta_0 / |r| = sqrt2 - 1 (1000 points)",
        worst,
        1e-12,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let xs: Vec<f64> = (0..10_000)
        .map(|_| {
            let mag = eps * 10f64.powf(rng.random_range(1e-9..6.0));
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let kind = |k: WeightKind| w.derived(k);
    let exact = |a: &dyn Fn(f64) -> f64, b: &dyn Fn(f64) -> f64| {
        xs.iter().filter(|&&x| a(x) != b(x)).count() as f64
    };
    let a0 = Alpha::new(0.0).expect("valid");
    let a2 = Alpha::new(2.0).expect("valid");
    rep.push(Check::within(
        "omega_0 = |r| exactly (10^4 points)",
        exact(&|x| kind(WeightKind::Omega(a0)).eval(x), &|x| {
            w.eval(x).abs()
        }),
        0.0,
    ));
    rep.push(Check::within(
        "omega_2 = r_plus exactly (10^4 points)",
        exact(&|x| kind(WeightKind::Omega(a2)).eval(x), &|x| {
            kind(WeightKind::RPlus).eval(x)
        }),
        0.0,
    ));
    rep.push(Check::within(
        "eta~_2 = r_minus exactly (10^4 points)",
        exact(&|x| kind(WeightKind::EtaTilde(a2)).eval(x), &|x| {
            kind(WeightKind::RMinus).eval(x)
        }),
        0.0,
    ));
    for a in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let alpha = Alpha::new(a).expect("valid");
        let (eta, omega) = (kind(WeightKind::Eta(alpha)), kind(WeightKind::Omega(alpha)));
        let (rp, rm) = (kind(WeightKind::RPlus), kind(WeightKind::RMinus));
        let mut excess = 0.0f64;
        let mut sup = [0.0f64; 3];
        for &x in &xs {
            let ar = w.eval(x).abs();
            excess = excess.max(eta.eval(x) * omega.eval(x) / (ar * ar) - 0.5);
            sup[0] = sup[0].max(omega.eval(x) / rp.eval(x));
            sup[1] = sup[1].max(eta.eval(x) / omega.eval(x));
            sup[2] = sup[2].max(rm.eval(x) / eta.eval(x));
        }
        rep.push(Check::within(
            format!("eta * omega / r^2 <= 1/2 alpha={a} (10^4 points)"),
            excess.max(0.0),
            1e-15,
        ));
        rep.push(Check::flag(
            format!("embedding constants finite alpha={a}"),
            sup.iter().all(|s| s.is_finite()),
        ));
        rep.note(format!(
            "alpha={a}: sup omega/r_plus {}, sup eta/omega {}, sup r_minus/eta {}",
            sup[0], sup[1], sup[2]
        ));
    }
    for a in [0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a).expect("valid");
        let eta = w.derived(WeightKind::Eta(alpha));
        let tilde = w.derived(WeightKind::EtaTilde(alpha));
        for x in [1e2, 1e4, 1e6] {
            let q = eta.eval(x) / tilde.eval(x);
            let lower = 1.0 / (2.0 * (1.0 + x.powf(-a)).sqrt());
            let slack = (lower - q).max(q - 0.5).max(0.0);
            rep.push(Check::within(
                format!("eta/eta~ in [1/(2 sqrt(1+x^-a)), 1/2] alpha={a} x={x:e}"),
                slack,
                1e-15,
            ));
        }
    }
    rep
}

/// Random piecewise-constant function supported in `[-8, 8]`.
pub fn random_piecewise(rng: &mut ChaCha8Rng, eps: f64) -> TestFunction {
    let pieces = rng.random_range(1..=4);
    let mut spec = Vec::with_capacity(pieces);
    for _ in 0..pieces {
        let a = rng.random_range(-8.0..8.0);
        let len = rng.random_range(0.1 * eps..4.0 * eps);
        let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        spec.push((a, (a + len).min(8.0), v));
    }
    TestFunction::piecewise_constant(&spec)
}

/// `int (Q_alpha f) conj(g) |r| = 2 (f_o, g_o)_omega + (f, g)_eta`.
pub fn q_representation(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let mut rep = Report::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for a in [0.0, 0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a)?;
        let mut worst = 0.0f64;
        let mut worst_ratio = 0.0f64;
        for _ in 0..cfg.random_pairs {
            let f = random_piecewise(&mut rng, ctx.weight.epsilon());
            let g = random_piecewise(&mut rng, ctx.weight.epsilon());
            let qf = crate::forms::apply_q_alpha(&f, alpha);
            let lhs = ctx.inner_product(InnerProductKind::AbsR, &qf, &g)?.value;
            let rhs = ctx.t_alpha_pos(&f, &g, alpha)?.value;
            let scale = (ctx.t_alpha_pos(&f, &f, alpha)?.value.re
                * ctx.t_alpha_pos(&g, &g, alpha)?.value.re)
                .sqrt()
                .max(1.0);
            worst = worst.max((lhs - rhs).norm());
            worst_ratio = worst_ratio.max((lhs - rhs).norm() / scale);
        }
        rep.push(Check::within(
            format!(
                "(Q f, g)_|r| = t_alpha(f, g) alpha={a} ({} pairs, scaled)",
                cfg.random_pairs
            ),
            worst_ratio,
            1e-8,
        ));
        rep.note(format!("alpha={a}: largest absolute deviation {worst:e}"));
    }
    Ok(rep)
}

/// `f_beta` in `dom t_alpha \ dom t_beta`, `g_alpha` in `dom t_beta \ dom t_alpha`.
pub fn membership_pattern(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let oracle = MembershipOracle::new(cfg.weight.clone(), cfg.quadrature);
    let mut rep = Report::new();
    let mut indeterminate = 0;
    for (i, &a) in cfg.alphas.iter().enumerate() {
        for &b in &cfg.alphas[i + 1..] {
            if a >= b {
                continue;
            }
            let t = oracle.witness_table(a, b)?;
            indeterminate += t.indeterminate_count();
            for row in &t.rows {
                rep.push(Check::flag(
                    format!(
                        "({a},{b}) {} in dom t_{}: {} (expected {})",
                        row.function,
                        row.space.value(),
                        row.verdict.verdict,
                        row.expected
                    ),
                    row.matches(),
                ));
            }
        }
    }
    rep.push(Check::within(
        "indeterminate verdicts",
        indeterminate as f64,
        0.0,
    ));
    Ok(rep)
}

/// Sample points for pointwise checks on `[-10, 10]`, avoiding panel edges.
fn pointwise_samples() -> Vec<f64> {
    (0..400)
        .map(|i| -10.0 + 20.0 * (i as f64 + 0.5) / 400.0 + 1e-3)
        .collect()
}

fn involution_functions(cfg: &SuiteConfig, count: usize) -> Result<Vec<TestFunction>, SuiteError> {
    let eps = cfg.weight.epsilon();
    let mut fs = vec![
        truncate(&make_f_tau(1.0, &cfg.weight)?, 8.0),
        truncate(&make_g_tau(0.0, &cfg.weight)?, 8.0),
        truncate(
            &make_f_tau(0.5, &cfg.weight)?.add(&make_g_tau(2.0, &cfg.weight)?),
            6.0,
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    while fs.len() < count {
        fs.push(random_piecewise(&mut rng, eps));
    }
    Ok(fs)
}

/// `S_alpha^2 f = f` pointwise and symmetry of `Q_alpha` in `(.,.)_r`.
pub fn involution(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let mut rep = Report::new();
    let fs = involution_functions(cfg, 20)?;
    let xs = pointwise_samples();
    for a in [0.0, 0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a)?;
        let mut worst = 0.0f64;
        for f in &fs {
            let s2 = apply_s_alpha(&apply_s_alpha(f, alpha)?, alpha)?;
            for &x in &xs {
                let d = (s2.eval(x) - f.eval(x)).norm() / (1.0 + x.abs().powf(a));
                worst = worst.max(d);
            }
        }
        rep.push(Check::within(
            format!(
                "S_alpha^2 f = f alpha={a} ({} functions, relative to 1+|x|^a)",
                fs.len()
            ),
            worst,
            1e-12,
        ));
        let mut sym = 0.0f64;
        for pair in fs.windows(2) {
            let (f, g) = (&pair[0], &pair[1]);
            let qf = crate::forms::apply_q_alpha(f, alpha);
            let qg = crate::forms::apply_q_alpha(g, alpha);
            let l = ctx.inner_product(InnerProductKind::AbsR, &qf, g)?.value;
            let r = ctx.inner_product(InnerProductKind::AbsR, f, &qg)?.value;
            sym = sym.max((l - r).norm() / l.norm().max(1.0));
        }
        rep.push(Check::within(
            format!("(Q f, g)_r = (f, Q g)_r alpha={a}"),
            sym,
            1e-8,
        ));
    }
    Ok(rep)
}

/// `L^2_{r+} in dom t_alpha in L^2_{r-}` on the witness family and positivity.
pub fn hilbert_triplet(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let oracle = MembershipOracle::new(cfg.weight.clone(), cfg.quadrature);
    let mut rep = Report::new();
    let mut family: Vec<(String, TestFunction)> = Vec::new();
    for tau in [0.0, 0.5, 1.0, 1.5, 2.0] {
        family.push((format!("f_{tau}"), make_f_tau(tau, &cfg.weight)?));
        family.push((format!("g_{tau}"), make_g_tau(tau, &cfg.weight)?));
        family.push((
            format!("f_{tau} on [-8,8]"),
            truncate(&make_f_tau(tau, &cfg.weight)?, 8.0),
        ));
    }
    for alpha in cfg.alpha_list()? {
        let mut broken = Vec::new();
        for (name, f) in &family {
            let plus = oracle.decide_membership(f, WeightKind::RPlus).verdict;
            let dom = oracle.decide_dom_t_alpha(f, alpha).verdict;
            let minus = oracle.decide_membership(f, WeightKind::RMinus).verdict;
            if (plus == Verdict::Member && dom != Verdict::Member)
                || (dom == Verdict::Member && minus != Verdict::Member)
            {
                broken.push(name.clone());
            }
        }
        rep.push(Check::within(
            format!("inclusions L2_r+ < dom t < L2_r- alpha={}", alpha.value()),
            broken.len() as f64,
            0.0,
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        let mut min_ratio = f64::INFINITY;
        for _ in 0..cfg.random_pairs {
            let f = random_piecewise(&mut rng, cfg.weight.epsilon());
            let t = ctx.t_alpha_pos(&f, &f, alpha)?.value.re;
            let l2 = ctx.inner_product(InnerProductKind::AbsR, &f, &f)?.value.re;
            if l2 > 0.0 {
                min_ratio = min_ratio.min(t / l2);
            }
        }
        rep.push(Check::flag(
            format!("t_alpha(f, f) > 0 on random f alpha={}", alpha.value()),
            min_ratio > 0.0,
        ));
    }
    Ok(rep)
}

/// `int_{-K}^{K} f conj(g) r dx` by direct panel quadrature on `[-K, K]`.
fn direct_signed_integral(
    f: &TestFunction,
    g: &TestFunction,
    w: &ModelWeight,
    cfg: &QuadratureConfig,
) -> Result<Complex64, SuiteError> {
    let k = f
        .support()
        .bound()
        .unwrap_or(16.0)
        .min(g.support().bound().unwrap_or(16.0));
    let eps = w.epsilon();
    if k <= eps {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut hints: Vec<f64> = f
        .breakpoints()
        .iter()
        .chain(g.breakpoints())
        .copied()
        .collect();
    hints.extend([-eps, eps]);
    let rule = GaussLegendre::new(cfg.nodes_per_panel);
    let h = |x: f64| f.eval(x) * g.eval(x).conj() * w.eval(x);
    Ok(integrate_interval(&h, -k, k, &hints, &rule, cfg)?.0)
}

/// Krein structure on compactly supported functions: `t_alpha[f, g] = [f, g]_r`,
/// `J_alpha = S_alpha`, and the projections `P^{+-}`.
pub fn krein_structure(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let mut rep = Report::new();
    let xs = pointwise_samples();
    for a in [0.0, 0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
        let (mut indef, mut j_is_s, mut split, mut orth, mut signs) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..cfg.random_pairs {
            let f = random_piecewise(&mut rng, cfg.weight.epsilon());
            let g = random_piecewise(&mut rng, cfg.weight.epsilon());
            let scale = (ctx.t_alpha_pos(&f, &f, alpha)?.value.re
                * ctx.t_alpha_pos(&g, &g, alpha)?.value.re)
                .sqrt()
                .max(1.0);
            let t_ind = ctx.t_alpha_indef(&f, &g)?.value;
            let direct = direct_signed_integral(&f, &g, &cfg.weight, &cfg.quadrature)?;
            indef = indef.max((t_ind - direct).norm() / scale);
            let sf = apply_s_alpha(&f, alpha)?;
            j_is_s = j_is_s.max((ctx.t_alpha_pos(&sf, &g, alpha)?.value - t_ind).norm() / scale);
            let pp = project_pm(&f, alpha, Sign::Plus)?;
            let pm = project_pm(&f, alpha, Sign::Minus)?;
            let sum = pp.add(&pm);
            for &x in &xs {
                split = split.max((sum.eval(x) - f.eval(x)).norm());
            }
            let gm = project_pm(&g, alpha, Sign::Minus)?;
            orth = orth.max(ctx.t_alpha_pos(&pp, &gm, alpha)?.value.norm() / scale);
            let plus = ctx.t_alpha_indef(&pp, &pp)?.value.re;
            let minus = ctx.t_alpha_indef(&pm, &pm)?.value.re;
            signs = signs
                .max((-plus).max(0.0) / scale)
                .max(minus.max(0.0) / scale);
        }
        rep.push(Check::within(
            format!("t_alpha[f, g] = int f conj(g) r (compact) alpha={a}"),
            indef,
            1e-8,
        ));
        rep.push(Check::within(
            format!("t_alpha(S f, g) = t_alpha[f, g] alpha={a}"),
            j_is_s,
            1e-8,
        ));
        rep.push(Check::within(
            format!("P+ f + P- f = f alpha={a}"),
            split,
            1e-12,
        ));
        rep.push(Check::within(
            format!("t_alpha(P+ f, P- g) = 0 alpha={a}"),
            orth,
            1e-8,
        ));
        rep.push(Check::within(
            format!("signs of t_alpha[P+- f, P+- f] alpha={a}"),
            signs,
            1e-8,
        ));
    }
    Ok(rep)
}

/// Symmetric truncations of `g_0` are neutral; the principal limit matches
/// the direct integral for compact support.
pub fn principal_limit(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let mut rep = Report::new();
    let g0 = make_g_tau(0.0, &cfg.weight)?;
    let mut worst = 0.0f64;
    for j in 1..=12 {
        let k = 2f64.powi(j) * cfg.weight.epsilon();
        let gk = truncate(&g0, k);
        worst = worst.max(ctx.t_alpha_indef(&gk, &gk)?.value.norm());
    }
    rep.push(Check::within(
        "t[g_0 on [-k,k], same] = 0 exactly, k = 2..4096",
        worst,
        0.0,
    ));
    let full = ctx.t_alpha_indef(&g0, &g0)?;
    rep.push(Check::flag(
        "t[g_0, g_0] principal limit converges to 0",
        full.diagnostics.status == Status::Converged && full.value.norm() == 0.0,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(4));
    let mut dev = 0.0f64;
    for _ in 0..cfg.random_pairs {
        let f = random_piecewise(&mut rng, cfg.weight.epsilon());
        let t = ctx.t_alpha_indef(&f, &f)?.value;
        let direct = direct_signed_integral(&f, &f, &cfg.weight, &cfg.quadrature)?;
        let scale = ctx
            .inner_product(InnerProductKind::AbsR, &f, &f)?
            .value
            .re
            .max(1.0);
        dev = dev.max((t - direct).norm() / scale);
    }
    rep.push(Check::within(
        "t[f, f] = int |f|^2 r (compact f)",
        dev,
        1e-8,
    ));
    Ok(rep)
}

fn dyadic(max_power: i32, eps: f64) -> Vec<f64> {
    (1..=max_power).map(|j| eps * 2f64.powi(j)).collect()
}

/// Odd-part growth of `t_alpha(g_k, g_k)`, unit norm of `E([-k, k])` and
/// dominance of the Ritz estimates over the square-root bound.
pub fn growth_bounds(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let eps = cfg.weight.epsilon();
    let mut rep = Report::new();
    let ks = [4.0, 16.0, 64.0, 256.0].map(|k| k * eps);
    for a in [0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a)?;
        let mut rel = 0.0f64;
        let mut increasing = true;
        let mut last = 0.0;
        for &k in &ks {
            let w = divergence_witness(alpha, k, &ctx)?;
            rel = rel.max((w.odd_term - w.predicted_odd_term).abs() / w.predicted_odd_term);
            increasing &= w.total > last;
            last = w.total;
        }
        rep.push(Check::within(
            format!("odd term of t(g_k, g_k) = (2/a)(k^(a/2) - eps^(a/2)) alpha={a}"),
            rel,
            1e-6,
        ));
        rep.push(Check::flag(
            format!("t(g_k, g_k) increasing in k alpha={a}"),
            increasing,
        ));
    }
    for a in [0.0, 0.5, 1.0, 2.0] {
        let alpha = Alpha::new(a)?;
        let mut dev = 0.0f64;
        for &k in &ks {
            let e = estimate_projection_norm(
                &SpectralInterval::closed(-k, k),
                alpha,
                &GridSpec::default(),
                &ctx,
            )?;
            dev = dev.max((e.value - 1.0).abs());
        }
        rep.push(Check::within(
            format!("||E([-k,k])|| = 1 alpha={a}"),
            dev,
            1e-6,
        ));
        let curve = growth_curve(alpha, &dyadic(8, eps), &GridSpec::default(), &ctx)?;
        let worst = curve
            .samples
            .iter()
            .map(|s| (s.sqrt_variant_bound - s.norm_estimate).max(0.0))
            .fold(0.0, f64::max);
        rep.push(Check::within(
            format!("Ritz ||E((eps,k])|| >= sqrt variant bound alpha={a}"),
            worst,
            0.0,
        ));
        let excess = curve.paper_bound_excess();
        if !excess.is_empty() {
            rep.note(format!(
                "alpha={a}: unsquared bound exceeds the Ritz estimate at k = {excess:?}"
            ));
        }
    }
    Ok(rep)
}

/// Regular at `alpha = 0` with a bounded witness, singular otherwise with
/// fitted exponent near `alpha/2`.
pub fn critical_point(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let ks = dyadic(cfg.growth_max_power, cfg.weight.epsilon());
    let mut rep = Report::new();
    for a in [0.0, 0.5, 1.0, 2.0] {
        let curve = growth_curve(Alpha::new(a)?, &ks, &GridSpec::default(), &ctx)?;
        let v = classify_infinity(&curve, DEFAULT_EXPONENT_MARGIN)?;
        if a == 0.0 {
            rep.push(Check::flag(
                "alpha=0 classified regular",
                v.classification == Classification::Regular,
            ));
            let bound = 2f64.sqrt() + 1.0;
            rep.push(Check::within(
                "alpha=0 bounded witness <= sqrt2 + 1",
                (v.bounded_witness.unwrap_or(f64::INFINITY) - bound).max(0.0),
                1e-6,
            ));
        } else {
            rep.push(Check::flag(
                format!("alpha={a} classified singular"),
                v.classification == Classification::Singular,
            ));
            rep.push(Check::within(
                format!("alpha={a} fitted exponent vs alpha/2"),
                (v.fitted_exponent - a / 2.0).abs(),
                0.15,
            ));
        }
        rep.note(format!("alpha={a}: fitted exponent {}", v.fitted_exponent));
    }
    Ok(rep)
}

/// Only `alpha = 0` yields a regular critical point.
pub fn regular_closure(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let ks = dyadic(cfg.growth_max_power, cfg.weight.epsilon());
    let mut rep = Report::new();
    for alpha in cfg.alpha_list()? {
        let curve = growth_curve(alpha, &ks, &GridSpec::default(), &ctx)?;
        let v = classify_infinity(&curve, DEFAULT_EXPONENT_MARGIN)?;
        let regular = v.classification == Classification::Regular;
        rep.push(Check::flag(
            format!(
                "alpha={} regular iff alpha = 0 ({})",
                alpha.value(),
                v.classification
            ),
            regular == (alpha.value() == 0.0),
        ));
    }
    Ok(rep)
}

/// Contour-built projections on random discretized models.
pub fn contour_calculus(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let ctx = cfg.context();
    let spec = ContourSpec::default();
    let alpha = Alpha::new(1.0)?;
    let mut rep = Report::new();
    for &n in &cfg.model_sizes {
        for s in 0..cfg.seeds as u64 {
            let r = randomized_suite(cfg.seed.wrapping_add(s), n, alpha, &ctx, &spec)?;
            let keep: Vec<Check> = r
                .checks
                .into_iter()
                .filter(|c| {
                    !c.property.contains("parseval") && !c.property.contains("representation")
                })
                .collect();
            rep.checks.extend(keep);
        }
    }
    Ok(rep)
}

fn identity_models(
    cfg: &SuiteConfig,
) -> Result<Vec<(String, crate::langer_contour::DiscretizedModel)>, SuiteError> {
    let ctx = cfg.context();
    let alpha = Alpha::new(1.0)?;
    let eps = cfg.weight.epsilon();
    let mut models = Vec::new();
    let eight: Vec<f64> = [-4.5, -3.5, -2.5, -1.5, 1.5, 2.5, 3.5, 4.5]
        .iter()
        .map(|x| x * eps)
        .collect();
    models.push((
        "8-point".to_string(),
        build_discretized_model(alpha, &ctx, &eight)?,
    ));
    for &n in &cfg.model_sizes {
        for s in 0..cfg.seeds as u64 {
            let seed = cfg.seed.wrapping_add(s);
            let grid = random_grid(seed, n, eps);
            models.push((
                format!("seed {seed} N {n}"),
                build_discretized_model(alpha, &ctx, &grid)?,
            ));
        }
    }
    Ok(models)
}

fn test_vectors(n: usize, seed: u64) -> Vec<(String, Vec<Complex64>)> {
    let mut e1 = vec![Complex64::new(0.0, 0.0); n];
    e1[0] = Complex64::new(1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    vec![
        ("e_1".into(), e1),
        ("random".into(), random),
        ("ones".into(), vec![Complex64::new(1.0, 0.0); n]),
    ]
}

/// `{v, v}_+ = int lambda d[E(lambda) v, v]` on discretized models.
pub fn parseval_plus(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let spec = ContourSpec::default();
    let mut rep = Report::new();
    for (name, model) in identity_models(cfg)? {
        for (vname, v) in test_vectors(model.len(), cfg.seed.wrapping_add(5)) {
            rep.extend(
                check_parseval_plus(&model, &v, &spec)?.scoped(&format!("{name} v={vname}")),
            );
        }
    }
    Ok(rep)
}

/// `[u, v] = {A_- u, v}_-` on discretized models.
pub fn representation_identity(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let mut rep = Report::new();
    for (name, model) in identity_models(cfg)? {
        let vs = test_vectors(model.len(), cfg.seed.wrapping_add(6));
        let pairs = [(0, 2), (1, 2), (2, 2), (1, 1)];
        for (i, j) in pairs {
            let mut c = check_representation(&model, &vs[i].1, &vs[j].1);
            c.property = format!("{name} u={} v={}: {}", vs[i].0, vs[j].0, c.property);
            rep.push(c);
        }
    }
    Ok(rep)
}

/// Discrete indefinite Sturm-Liouville problem: symmetry, two-sided
/// spectrum, normalization, orthogonality, refinement and the expansion of `u_0`.
pub fn sturm_liouville(cfg: &SuiteConfig) -> Result<Report, SuiteError> {
    let mut rep = Report::new();
    let prob = SlProblem::new(cfg.sl_cells, cfg.sl_grading)?;
    let op = assemble_operator(&prob);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(7));
    let n = op.dim();
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (uv, vu) = (op.form(&u, &v), op.form(&v, &u));
    rep.push(Check::within(
        "discrete operator symmetric",
        (uv - vu).abs() / uv.abs().max(vu.abs()).max(1.0),
        1e-12,
    ));
    let count = cfg.sl_pairs_per_sign.max(20);
    let pairs = compute_eigenpairs(&op, count)?;
    let per_sign = |s: f64| pairs.iter().filter(|p| p.lambda.signum() == s).count();
    rep.push(Check::flag(
        format!(
            "at least 20 eigenvalues per sign ({} / {})",
            per_sign(-1.0),
            per_sign(1.0)
        ),
        per_sign(-1.0) >= 20 && per_sign(1.0) >= 20,
    ));
    let find = |i: i64| pairs.iter().find(|p| p.index == i).map(|p| p.lambda);
    rep.push(Check::flag(
        "lambda_-1 < 0 < lambda_1",
        matches!((find(-1), find(1)), (Some(a), Some(b)) if a < 0.0 && 0.0 < b),
    ));
    let gap = spectral_gap(&op, &pairs);
    rep.push(Check::flag(
        "no eigenvalue in (-gap, gap)",
        gap.is_some_and(|g| g > 0.0),
    ));
    if let Some(g) = gap {
        rep.note(format!("spectral gap around 0: {g}"));
    }
    let res = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    rep.push(Check::within(
        "normalization |1 - |lambda|(u,u)|",
        res,
        1e-10,
    ));
    rep.push(Check::within(
        "discrete orthogonality |t[u_m, u_n]|",
        max_off_orthogonality(&op, &pairs),
        1e-6,
    ));
    let dom = u0_dom_t_integral(&cfg.quadrature)?;
    rep.push(Check::flag(
        "int |p| |u_0'|^2 converges",
        dom.status == Status::Converged,
    ));
    rep.note(format!("int |p| |u_0'|^2 = {}", dom.value.re));
    let ends = eval_u0(-1.0)?.abs().max(eval_u0(1.0)?.abs());
    rep.push(Check::within("u_0(-1) = u_0(1) = 0", ends, 1e-15));

    let coarse = SlProblem::new(cfg.sl_cells / 2, cfg.sl_grading)?;
    let coarse_pairs = compute_eigenpairs(&assemble_operator(&coarse), 20)?;
    let mut drift = 0.0f64;
    for p in &coarse_pairs {
        if let Some(l) = find(p.index) {
            drift = drift.max(((l - p.lambda) / l).abs());
        }
    }
    rep.push(Check::within(
        "two-mesh eigenvalue drift (20 per sign)",
        drift,
        0.05,
    ));

    let coeffs = expansion_coefficients(&prob, &pairs);
    let schedule = default_schedule(&pairs, cfg.sl_schedule_points);
    let study = partial_sum_study(&op, &coeffs, &pairs, &schedule)?;
    rep.push(Check::within(
        "one-sided norm growth factor >= 2 (proxy for non-convergence)",
        (2.0 - study.max_growth()).max(0.0),
        0.0,
    ));
    rep.note(format!(
        "one-sided growth factors: plus {}, minus {}; two-sided log-log rate {}",
        study.growth_plus, study.growth_minus, study.growth_rate
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_rejected() {
        assert!(matches!(
            run_suite("lemma-9.9", &SuiteConfig::default()),
            Err(SuiteError::UnknownSuite(_))
        ));
    }

    #[test]
    fn cheap_suites_pass() {
        let cfg = SuiteConfig {
            random_pairs: 4,
            ..SuiteConfig::default()
        };
        for name in [
            "lemma-6.1",
            "lemma-6.2",
            "lemma-6.4",
            "lemma-6.6",
            "lemma-6.7",
        ] {
            let rep = run_suite(name, &cfg).unwrap();
            assert!(
                rep.passed(),
                "{name}: {:#?}",
                rep.failures().collect::<Vec<_>>()
            );
            assert!(rep.checks.iter().all(|c| c.property.starts_with(name)));
        }
    }
}
