//! `kcl`: drivers for membership tables, norm growth, contour projections,
//! the Sturm-Liouville expansion and the verification suites.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kcl_core::eigenspectral::{classify_infinity, growth_curve, GridSpec, DEFAULT_EXPONENT_MARGIN};
use kcl_core::forms::FormContext;
use kcl_core::langer_contour::{
    build_discretized_model, contour_spectral_projection, random_grid, random_intervals,
    randomized_suite, ContourSpec,
};
use kcl_core::membership::MembershipOracle;
use kcl_core::model_space::Alpha;
use kcl_core::report::{csv_field, Report};
use kcl_core::sturm_liouville::{
    assemble_operator, compute_eigenpairs, default_schedule, expansion_coefficients,
    max_off_orthogonality, partial_sum_study, spectral_gap, write_coefficients_csv,
    write_eigenvalues_csv, write_trajectories_csv, SlProblem,
};
use kcl_core::suite::{run_suite, SuiteConfig, SUITES};

use config::{parse_k_range, parse_list, RunConfig};

#[derive(Parser)]
#[command(
    name = "kcl",
    version,
    about = "Closure domains, spectral projections and indefinite expansions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Witness table for dom t_alpha against dom t_beta.
    Membership {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Ritz estimates of ||E((eps, k])|| per alpha.
    Growth {
        /// Comma separated list; defaults to the config list.
        #[arg(long)]
        alpha: Option<String>,
        /// `lo..hi` doubling schedule or a comma list.
        #[arg(long, default_value = "2..256")]
        k: String,
    },
    /// Contour-built spectral projections on random discretized models.
    Contour {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
    /// Discrete indefinite Sturm-Liouville problem and the expansion of u_0.
    Sl {
        #[arg(long, default_value_t = 4096)]
        cells: usize,
        #[arg(long, default_value_t = 3.0)]
        grading: f64,
        /// Eigenpairs per sign.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Truncation radii in the partial-sum schedule.
        #[arg(long, default_value_t = 16)]
        points: usize,
    },
    /// Run verification suites and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Model size for the randomized contour suites.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Check,
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

fn usage<E: ToString>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    summary: Vec<(String, String)>,
}

impl Run {
    fn context(&self) -> Result<FormContext, Failure> {
        Ok(FormContext::new(
            self.cfg.model_weight().map_err(usage)?,
            self.cfg.quadrature().map_err(usage)?,
        ))
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    /// Writes via a temporary file and rename so readers never see partial output.
    fn write(&self, name: &str, body: &[u8]) -> Result<(), Failure> {
        fs::create_dir_all(&self.out)?;
        let tmp = self.out.join(format!(".{name}.tmp"));
        fs::File::create(&tmp)?.write_all(body)?;
        fs::rename(&tmp, self.out.join(name))?;
        Ok(())
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), Failure> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn finish(&mut self, passed: bool) -> Result<(), Failure> {
        self.record("passed", passed);
        let mut text = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(text, "{k} = {v}");
        }
        self.write("run_summary.txt", text.as_bytes())?;
        if passed {
            Ok(())
        } else {
            Err(Failure::Check)
        }
    }
}

fn alpha_label(a: f64) -> String {
    format!("{a}")
}

fn cmd_membership(run: &mut Run, alpha: f64, beta: f64) -> Result<(), Failure> {
    Alpha::new(alpha).map_err(usage)?;
    Alpha::new(beta).map_err(usage)?;
    let oracle = MembershipOracle::new(
        run.cfg.model_weight().map_err(usage)?,
        run.cfg.quadrature().map_err(usage)?,
    );
    let table = oracle.witness_table(alpha, beta).map_err(usage)?;
    let mut csv = String::from("alpha,beta,function,space,verdict,expected,match\n");
    for row in &table.rows {
        let _ = writeln!(
            csv,
            "{alpha},{beta},{},{},{},{},{}",
            csv_field(&row.function),
            row.space.value(),
            row.verdict.verdict,
            row.expected,
            row.matches()
        );
        println!(
            "{} {} in dom t_{}: {} (expected {})",
            if row.matches() { "PASS" } else { "FAIL" },
            row.function,
            row.space.value(),
            row.verdict.verdict,
            row.expected
        );
    }
    run.write("witness_table.csv", csv.as_bytes())?;
    run.record("alpha", alpha);
    run.record("beta", beta);
    run.record("indeterminate", table.indeterminate_count());
    run.finish(table.matches_pattern())
}

fn cmd_growth(run: &mut Run, alpha: Option<&str>, k: &str) -> Result<(), Failure> {
    if let Some(list) = alpha {
        run.cfg.alpha = parse_list(list).map_err(usage)?;
    }
    let alphas = run.cfg.alphas().map_err(usage)?;
    let eps = run.cfg.weight.epsilon;
    let ks = parse_k_range(k).map_err(usage)?;
    if let Some(bad) = ks.iter().find(|&&k| k <= eps) {
        return Err(usage(format!("k = {bad} must exceed epsilon = {eps}")));
    }
    let ctx = run.context()?;
    let mut ok = true;
    let mut verdicts = String::from("alpha,classification,fitted_exponent,bounded_witness\n");
    for alpha in alphas {
        let curve = growth_curve(alpha, &ks, &GridSpec::default(), &ctx).map_err(usage)?;
        let label = alpha_label(alpha.value());
        run.write_with(&format!("growth_alpha_{label}.csv"), |b| curve.write_csv(b))?;
        let violations = curve.dominance_violations(0.0);
        ok &= violations.is_empty();
        let witness = match classify_infinity(&curve, DEFAULT_EXPONENT_MARGIN) {
            Ok(v) => {
                let w = v.bounded_witness.map(|w| w.to_string()).unwrap_or_default();
                let _ = writeln!(
                    verdicts,
                    "{label},{},{},{w}",
                    v.classification, v.fitted_exponent
                );
                run.record(&format!("classification.alpha_{label}"), v.classification);
                v.classification.to_string()
            }
            Err(e) => {
                let _ = writeln!(verdicts, "{label},indeterminate,{},", curve.fitted_exponent);
                format!("indeterminate ({e})")
            }
        };
        println!(
            "{} alpha={label} max estimate {} fitted exponent {} infinity {witness}",
            if violations.is_empty() {
                "PASS"
            } else {
                "FAIL"
            },
            curve.max_estimate(),
            curve.fitted_exponent
        );
        run.record(
            &format!("dominance_violations.alpha_{label}"),
            violations.len(),
        );
        let excess = curve.paper_bound_excess();
        if !excess.is_empty() {
            run.record(
                &format!("unsquared_bound_exceeds_estimate.alpha_{label}"),
                excess.len(),
            );
        }
    }
    run.write("critical_point.csv", verdicts.as_bytes())?;
    run.record("k_schedule", k);
    run.finish(ok)
}

fn cmd_contour(run: &mut Run, alpha: Option<f64>, n: usize, seeds: u64) -> Result<(), Failure> {
    let alpha = Alpha::new(alpha.unwrap_or(1.0)).map_err(usage)?;
    if n < 2 || seeds == 0 {
        return Err(usage("need --n >= 2 and --seeds >= 1"));
    }
    let ctx = run.context()?;
    let spec = ContourSpec::default();
    let mut report = Report::new();
    for s in 0..seeds {
        let seed = run.cfg.seed.wrapping_add(s);
        report.extend(
            randomized_suite(seed, n, alpha, &ctx, &spec)
                .map_err(usage)?
                .scoped(&format!("seed {seed}")),
        );
    }
    let grid = random_grid(run.cfg.seed, n, run.cfg.weight.epsilon);
    let model = build_discretized_model(alpha, &ctx, &grid).map_err(usage)?;
    let delta = random_intervals(run.cfg.seed, &grid)[0];
    let p = contour_spectral_projection(&model, &delta, &spec).map_err(usage)?;
    let mut heat = String::from("i,j,x_i,x_j,value\n");
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let _ = writeln!(heat, "{i},{j},{},{},{}", grid[i], grid[j], p[(i, j)]);
        }
    }
    run.write("contour_projection.csv", heat.as_bytes())?;
    run.write_with("contour_checks.csv", |b| report.write_csv(b))?;
    for c in report.failures() {
        println!("{c}");
    }
    println!(
        "{} {} checks over {seeds} seeds, N = {n}",
        if report.passed() { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    run.record("alpha", alpha.value());
    run.record("n", n);
    run.record("seeds", seeds);
    run.record("projection_interval", delta);
    run.record("checks", report.checks.len());
    run.finish(report.passed())
}

fn cmd_sl(
    run: &mut Run,
    cells: usize,
    grading: f64,
    count: usize,
    points: usize,
) -> Result<(), Failure> {
    let problem = SlProblem::new(cells, grading).map_err(usage)?;
    if count == 0 {
        return Err(usage("--count must be positive"));
    }
    let op = assemble_operator(&problem);
    let pairs = compute_eigenpairs(&op, count).map_err(usage)?;
    let coeffs = expansion_coefficients(&problem, &pairs);
    let schedule = default_schedule(&pairs, points);
    let study = partial_sum_study(&op, &coeffs, &pairs, &schedule).map_err(usage)?;
    run.write_with("eigenvalues.csv", |b| write_eigenvalues_csv(&pairs, b))?;
    run.write_with("coefficients.csv", |b| {
        write_coefficients_csv(&pairs, &coeffs, b)
    })?;
    run.write_with("trajectories.csv", |b| write_trajectories_csv(&study, b))?;
    let residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    let orth = max_off_orthogonality(&op, &pairs);
    let gap = spectral_gap(&op, &pairs);
    let ok = residual <= 1e-10 && orth <= 1e-6 && gap.is_some_and(|g| g > 0.0);
    println!(
        "{} {} eigenpairs, residual {residual:e}, orthogonality {orth:e}, gap {}",
        if ok { "PASS" } else { "FAIL" },
        pairs.len(),
        gap.map(|g| g.to_string()).unwrap_or_else(|| "none".into())
    );
    println!(
        "one-sided growth factors {} / {}, two-sided rate {}",
        study.growth_plus, study.growth_minus, study.growth_rate
    );
    run.record("cells", cells);
    run.record("grading", grading);
    run.record("eigenpairs", pairs.len());
    run.record("max_residual", residual);
    run.record("max_orthogonality", orth);
    run.record("gap", gap.unwrap_or(0.0));
    run.record("growth_plus", study.growth_plus);
    run.record("growth_minus", study.growth_minus);
    run.record("growth_rate", study.growth_rate);
    run.finish(ok)
}

fn cmd_verify(
    run: &mut Run,
    suite: &str,
    n: Option<usize>,
    seeds: Option<usize>,
) -> Result<(), Failure> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(usage(format!(
            "unknown suite {suite:?}; known: all, {}",
            SUITES.join(", ")
        )));
    }
    let mut cfg = SuiteConfig {
        weight: run.cfg.model_weight().map_err(usage)?,
        quadrature: run.cfg.quadrature().map_err(usage)?,
        seed: run.cfg.seed,
        alphas: run.cfg.alpha.clone(),
        ..SuiteConfig::default()
    };
    run.cfg.alphas().map_err(usage)?;
    if let Some(n) = n {
        cfg.model_sizes = vec![n];
    }
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    let report = run_suite(suite, &cfg).map_err(usage)?;
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite]
    };
    for name in &names {
        let prefix = format!("{name}/");
        let mine: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.property.starts_with(&prefix))
            .collect();
        let failed = mine.iter().filter(|c| !c.passed).count();
        println!(
            "{} {name:<12} {:>4} checks, {failed} failed",
            if failed == 0 { "PASS" } else { "FAIL" },
            mine.len()
        );
        for c in mine.iter().filter(|c| !c.passed) {
            println!("    {c}");
        }
        run.record(
            &format!("suite.{name}"),
            if failed == 0 { "pass" } else { "fail" },
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    run.write_with("verify.csv", |b| report.write_csv(b))?;
    run.record("checks", report.checks.len());
    run.finish(report.passed())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(cli.common.config.as_deref()).map_err(Failure::Usage)?;
    if let Some(out) = cli.common.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    cfg.model_weight().map_err(usage)?;
    cfg.quadrature().map_err(usage)?;
    let out = cfg.out.clone();
    let hash = cfg.hash();
    let mut run = Run {
        cfg,
        out,
        summary: Vec::new(),
    };
    run.record("config_hash", hash);
    run.record("seed", run.cfg.seed);
    match cli.command {
        Command::Membership { alpha, beta } => {
            run.record("command", "membership");
            cmd_membership(&mut run, alpha, beta)
        }
        Command::Growth { alpha, k } => {
            run.record("command", "growth");
            cmd_growth(&mut run, alpha.as_deref(), &k)
        }
        Command::Contour { alpha, n, seeds } => {
            run.record("command", "contour");
            cmd_contour(&mut run, alpha, n, seeds)
        }
        Command::Sl {
            cells,
            grading,
            count,
            points,
        } => {
            run.record("command", "sl");
            cmd_sl(&mut run, cells, grading, count, points)
        }
        Command::Verify { suite, n, seeds } => {
            run.record("command", "verify");
            run.record("suite", &suite);
            cmd_verify(&mut run, &suite, n, seeds)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("KCL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("KCL_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(usage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
