//! Acceptance table: one PASS/FAIL line per primary criterion, with the
//! measured worst deviation and the wall-clock budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kcl_core::report::Report;
use kcl_core::suite::{
    contour_calculus, critical_point, growth_bounds, involution, krein_structure,
    membership_pattern, parseval_plus, principal_limit, q_representation, representation_identity,
    sturm_liouville, weight_identities, SuiteConfig, SuiteError,
};

struct Criterion {
    id: &'static str,
    budget: Option<Duration>,
    run: fn(&SuiteConfig) -> Result<Report, SuiteError>,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: "weight identities (lemma-6.1)",
            budget: secs(1),
            run: |c| Ok(weight_identities(&c.weight)),
        },
        Criterion {
            id: "Q representation, 20 random pairs (lemma-6.2)",
            budget: secs(10),
            run: q_representation,
        },
        Criterion {
            id: "membership pattern on the alpha < beta grid (lemma-6.3, cor-6.11)",
            budget: secs(30),
            run: membership_pattern,
        },
        Criterion {
            id: "S_alpha^2 = id (lemma-6.4)",
            budget: None,
            run: involution,
        },
        Criterion {
            id: "principal limit and Krein structure (lemma-6.6, lemma-6.7)",
            budget: None,
            run: |c| {
                let mut r = principal_limit(c)?;
                r.extend(krein_structure(c)?);
                Ok(r)
            },
        },
        Criterion {
            id: "odd-term growth, unit norm, sqrt-variant dominance (prop-6.8)",
            budget: secs(120),
            run: growth_bounds,
        },
        Criterion {
            id: "critical point classification, k = 2..2^12 (thm-6.9)",
            budget: secs(300),
            run: critical_point,
        },
        Criterion {
            id: "contour spectral calculus, 10 seeds, N in {8, 32, 128} (thm-2.1)",
            budget: secs(60),
            run: contour_calculus,
        },
        Criterion {
            id: "Parseval+ and representation identities (cor-5.6, lemma-3.1)",
            budget: None,
            run: |c| {
                let mut r = parseval_plus(c)?;
                r.extend(representation_identity(c)?);
                Ok(r)
            },
        },
        Criterion {
            id: "indefinite Sturm-Liouville at M = 4096 (example-5.1)",
            budget: secs(300),
            run: sturm_liouville,
        },
    ]
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    println!("acceptance: {} primary criteria", criteria().len());
    for c in criteria() {
        let start = Instant::now();
        let outcome = (c.run)(&cfg);
        let elapsed = start.elapsed();
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let budget = c
            .budget
            .map(|b| format!(" < {}s", b.as_secs()))
            .unwrap_or_default();
        match outcome {
            Ok(report) => {
                let ok = report.passed() && in_budget;
                failed += usize::from(!ok);
                // worst deviation relative to its tolerance (0 tolerances count as exact)
                let ratio = report
                    .checks
                    .iter()
                    .map(|k| {
                        if k.tolerance > 0.0 {
                            k.deviation / k.tolerance
                        } else if k.deviation > 0.0 {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                println!(
                    "{} {}: {} checks, worst deviation/tolerance {ratio:.3e}, {:.2}s{budget}",
                    if ok { "PASS" } else { "FAIL" },
                    c.id,
                    report.checks.len(),
                    elapsed.as_secs_f64()
                );
                for f in report.failures() {
                    println!("    {f}");
                }
                if !in_budget {
                    println!("    runtime budget exceeded");
                }
                for n in &report.notes {
                    println!("    note: {n}");
                }
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {}: error {e}", c.id);
            }
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
