//! Integrability verdicts for the weighted spaces and for `dom t_alpha`.
//!
//! `f` belongs to `L^2_w` when `int |f|^2 w` converges. Membership in
//! `dom t_alpha` needs `f` in `L^2_{r_-}`, `f_e` in `L^2_{eta_alpha}` and
//! `f_o` in `L^2_{omega_alpha}`.

use std::fmt;

use thiserror::Error;

use crate::model_space::{
    even_part, make_f_tau, make_g_tau, odd_part, Alpha, ModelError, ModelWeight, TestFunction,
    WeightKind,
};
use crate::quadrature::{integrate_norm_squared, IntegrationResult, QuadratureConfig, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MembershipError {
    #[error("need alpha < beta, got alpha = {alpha}, beta = {beta}")]
    OrderViolation { alpha: f64, beta: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NotMember,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::NotMember => "not_member",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub evidence: Vec<IntegrationResult>,
    pub spaces_checked: Vec<(WeightKind, Status)>,
}

impl MembershipVerdict {
    fn from_checks(checks: Vec<(WeightKind, IntegrationResult)>) -> Self {
        let verdict = if checks.iter().any(|(_, r)| r.status == Status::Diverged) {
            Verdict::NotMember
        } else if checks.iter().all(|(_, r)| r.status == Status::Converged) {
            Verdict::Member
        } else {
            Verdict::Indeterminate
        };
        Self {
            verdict,
            spaces_checked: checks.iter().map(|(k, r)| (*k, r.status)).collect(),
            evidence: checks.into_iter().map(|(_, r)| r).collect(),
        }
    }
}

/// Decides membership from quadrature evidence only.
#[derive(Debug, Clone)]
pub struct MembershipOracle {
    pub weight: ModelWeight,
    pub cfg: QuadratureConfig,
    /// Let tail-exponent metadata settle the tail class when present.
    pub use_metadata: bool,
}

impl Default for MembershipOracle {
    fn default() -> Self {
        Self {
            weight: ModelWeight::default(),
            cfg: QuadratureConfig::default(),
            use_metadata: true,
        }
    }
}

impl MembershipOracle {
    pub fn new(weight: ModelWeight, cfg: QuadratureConfig) -> Self {
        Self {
            weight,
            cfg,
            use_metadata: true,
        }
    }

    pub fn numeric_only(mut self) -> Self {
        self.use_metadata = false;
        self
    }

    fn check(&self, f: &TestFunction, kind: WeightKind) -> (WeightKind, IntegrationResult) {
        let w = self.weight.derived(kind);
        let res = integrate_norm_squared(f, &w, self.use_metadata, &self.cfg).unwrap_or(
            IntegrationResult {
                value: f64::NAN.into(),
                abs_error_estimate: f64::INFINITY,
                status: Status::Indeterminate,
                tail_exponent: None,
            },
        );
        (kind, res)
    }

    pub fn decide_membership(&self, f: &TestFunction, kind: WeightKind) -> MembershipVerdict {
        MembershipVerdict::from_checks(vec![self.check(f, kind)])
    }

    pub fn decide_dom_t_alpha(&self, f: &TestFunction, alpha: Alpha) -> MembershipVerdict {
        let fe = even_part(f);
        let fo = odd_part(f);
        MembershipVerdict::from_checks(vec![
            self.check(f, WeightKind::RMinus),
            self.check(&fe, WeightKind::Eta(alpha)),
            self.check(&fo, WeightKind::Omega(alpha)),
        ])
    }

    /// Verdicts of `f_beta` and `g_alpha` against `dom t_alpha` and `dom t_beta`.
    pub fn witness_table(&self, alpha: f64, beta: f64) -> Result<WitnessTable, MembershipError> {
        if alpha.partial_cmp(&beta) != Some(std::cmp::Ordering::Less) {
            return Err(MembershipError::OrderViolation { alpha, beta });
        }
        let (a, b) = (Alpha::new(alpha)?, Alpha::new(beta)?);
        let f_beta = make_f_tau(beta, &self.weight)?;
        let g_alpha = make_g_tau(alpha, &self.weight)?;
        let row =
            |function: String, func: &TestFunction, space: Alpha, expected: Verdict| WitnessRow {
                function,
                space,
                verdict: self.decide_dom_t_alpha(func, space),
                expected,
            };
        let rows = vec![
            row(format!("f_{beta}"), &f_beta, a, Verdict::Member),
            row(format!("f_{beta}"), &f_beta, b, Verdict::NotMember),
            row(format!("g_{alpha}"), &g_alpha, a, Verdict::NotMember),
            row(format!("g_{alpha}"), &g_alpha, b, Verdict::Member),
        ];
        Ok(WitnessTable {
            alpha: a,
            beta: b,
            rows,
        })
    }
}

#[derive(Debug, Clone)]
pub struct WitnessRow {
    pub function: String,
    /// Index of the closure domain `dom t_space`.
    pub space: Alpha,
    pub verdict: MembershipVerdict,
    pub expected: Verdict,
}

impl WitnessRow {
    pub fn matches(&self) -> bool {
        self.verdict.verdict == self.expected
    }
}

#[derive(Debug, Clone)]
pub struct WitnessTable {
    pub alpha: Alpha,
    pub beta: Alpha,
    pub rows: Vec<WitnessRow>,
}

impl WitnessTable {
    /// `f_beta` lies in `dom t_alpha` only, `g_alpha` in `dom t_beta` only.
    pub fn matches_pattern(&self) -> bool {
        self.rows.iter().all(WitnessRow::matches)
    }

    pub fn indeterminate_count(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.verdict.verdict == Verdict::Indeterminate)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn f1_in_omega_half_not_omega_one() {
        let o = MembershipOracle::default();
        let f1 = make_f_tau(1.0, &o.weight).unwrap();
        for oracle in [o.clone(), o.clone().numeric_only()] {
            let f = f1.clone();
            assert_eq!(
                oracle
                    .decide_membership(&f, WeightKind::Omega(a(0.5)))
                    .verdict,
                Verdict::Member
            );
            assert_eq!(
                oracle
                    .decide_membership(&f, WeightKind::Omega(a(1.0)))
                    .verdict,
                Verdict::NotMember
            );
        }
    }

    #[test]
    fn zero_is_member_everywhere() {
        let o = MembershipOracle::default();
        let z = TestFunction::zero();
        for kind in [
            WeightKind::RPlus,
            WeightKind::RMinus,
            WeightKind::Omega(a(2.0)),
        ] {
            assert_eq!(o.decide_membership(&z, kind).verdict, Verdict::Member);
        }
    }

    #[test]
    fn g0_domains() {
        let o = MembershipOracle::default();
        let g0 = make_g_tau(0.0, &o.weight).unwrap();
        assert_eq!(o.decide_dom_t_alpha(&g0, a(1.0)).verdict, Verdict::Member);
        assert_eq!(
            o.decide_dom_t_alpha(&g0, a(0.0)).verdict,
            Verdict::NotMember
        );
        let f1 = make_f_tau(1.0, &o.weight).unwrap();
        assert_eq!(o.decide_dom_t_alpha(&f1, a(0.5)).verdict, Verdict::Member);
        assert_eq!(
            o.decide_dom_t_alpha(&f1, a(1.0)).verdict,
            Verdict::NotMember
        );
    }

    #[test]
    fn witness_tables() {
        let o = MembershipOracle::default();
        for (al, be) in [(0.0, 2.0), (0.5, 1.0)] {
            let t = o.witness_table(al, be).unwrap();
            assert!(t.matches_pattern(), "{al} {be}: {:#?}", t.rows);
            assert_eq!(t.indeterminate_count(), 0);
        }
        assert!(matches!(
            o.witness_table(1.0, 1.0),
            Err(MembershipError::OrderViolation { .. })
        ));
    }

    #[test]
    fn verdict_requires_evidence() {
        let o = MembershipOracle::default();
        let g0 = make_g_tau(0.0, &o.weight).unwrap();
        let v = o.decide_dom_t_alpha(&g0, a(0.0));
        assert_eq!(v.evidence.len(), 3);
        assert!(v.spaces_checked.iter().any(|(_, s)| *s == Status::Diverged));
    }
}
