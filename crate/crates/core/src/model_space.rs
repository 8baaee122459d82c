//! Weight family and named test functions on the real line.
//!
//! Everything here is an evaluation rule plus metadata. Nothing is sampled:
//! the quadrature layer decides where to evaluate.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha = {0} outside [0, 2]")]
    AlphaOutOfRange(f64),
    #[error("tau = {0} outside [0, 2]")]
    TauOutOfRange(f64),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
}

/// Parameter in `[0, 2]` indexing the weight family and the test functions.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if value.is_finite() && (0.0..=2.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(ModelError::AlphaOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type WeightRule = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FunctionRule = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Common surface of the signed weight `r` and of the derived non-negative weights.
pub trait Weight {
    fn eval(&self, x: f64) -> f64;
    /// Half-width of the gap `[-eps, eps]` on which the weight vanishes.
    fn epsilon(&self) -> f64;
    /// Power `p` with `|w(x)| ~ C |x|^p` for large `|x|`, when known.
    fn tail_exponent(&self) -> Option<f64>;
}

pub fn eval_weight<W: Weight + ?Sized>(w: &W, x: f64) -> f64 {
    w.eval(x)
}

/// Odd weight `r` with a gap: `r = 0` on `[-eps, eps]` and `x r(x) > 0` outside.
#[derive(Clone)]
pub struct ModelWeight {
    epsilon: f64,
    tail_power: Option<f64>,
    custom: Option<WeightRule>,
}

impl fmt::Debug for ModelWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelWeight")
            .field("epsilon", &self.epsilon)
            .field("tail_power", &self.tail_power)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl Default for ModelWeight {
    /// `eps = 1`, `r = sgn` outside the gap.
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            tail_power: Some(0.0),
            custom: None,
        }
    }
}

impl ModelWeight {
    /// `r(x) = sgn(x) |x|^s` for `|x| > eps`.
    pub fn power(epsilon: f64, tail_power: f64) -> Result<Self, ModelError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ModelError::InvalidWeight(format!(
                "gap radius must be positive, got {epsilon}"
            )));
        }
        if !(tail_power.is_finite() && tail_power > -1.0) {
            return Err(ModelError::InvalidWeight(format!(
                "tail power must exceed -1, got {tail_power}"
            )));
        }
        Ok(Self {
            epsilon,
            tail_power: Some(tail_power),
            custom: None,
        })
    }

    /// User rule, consulted only for `|x| > eps`. Oddness and the sign
    /// condition are checked on a log-spaced sample.
    pub fn custom(
        epsilon: f64,
        rule: WeightRule,
        tail_power: Option<f64>,
    ) -> Result<Self, ModelError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(ModelError::InvalidWeight(format!(
                "gap radius must be positive, got {epsilon}"
            )));
        }
        for i in 0..200 {
            let x = epsilon * (1.0 + 1e-9) * 10f64.powf(i as f64 * 8.0 / 199.0);
            let (rp, rm) = (rule(x), rule(-x));
            if !rp.is_finite() || !rm.is_finite() {
                return Err(ModelError::InvalidWeight(format!(
                    "non-finite value at |x| = {x}"
                )));
            }
            if rp <= 0.0 || rm >= 0.0 {
                return Err(ModelError::InvalidWeight(format!(
                    "sign condition fails at |x| = {x}"
                )));
            }
            if (rp + rm).abs() > 1e-12 * rp.abs() {
                return Err(ModelError::InvalidWeight(format!(
                    "rule is not odd at |x| = {x}"
                )));
            }
        }
        Ok(Self {
            epsilon,
            tail_power,
            custom: Some(rule),
        })
    }

    pub fn tail_power(&self) -> Option<f64> {
        self.tail_power
    }

    pub fn derived(&self, kind: WeightKind) -> DerivedWeight {
        DerivedWeight {
            base: self.clone(),
            kind,
        }
    }
}

impl Weight for ModelWeight {
    fn eval(&self, x: f64) -> f64 {
        if x.abs() <= self.epsilon {
            return 0.0;
        }
        match &self.custom {
            Some(rule) => rule(x),
            None => {
                let s = self.tail_power.unwrap_or(0.0);
                let mag = if s == 0.0 { 1.0 } else { x.abs().powf(s) };
                mag.copysign(x)
            }
        }
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn tail_exponent(&self) -> Option<f64> {
        self.tail_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    RPlus,
    RMinus,
    AbsR,
    Eta(Alpha),
    Omega(Alpha),
    EtaTilde(Alpha),
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::RPlus => write!(f, "r_plus"),
            WeightKind::RMinus => write!(f, "r_minus"),
            WeightKind::AbsR => write!(f, "abs_r"),
            WeightKind::Eta(a) => write!(f, "eta({a})"),
            WeightKind::Omega(a) => write!(f, "omega({a})"),
            WeightKind::EtaTilde(a) => write!(f, "eta_tilde({a})"),
        }
    }
}

/// Non-negative weight built from a [`ModelWeight`].
#[derive(Debug, Clone)]
pub struct DerivedWeight {
    pub base: ModelWeight,
    pub kind: WeightKind,
}

impl Weight for DerivedWeight {
    fn eval(&self, x: f64) -> f64 {
        let ar = self.base.eval(x).abs();
        if ar == 0.0 {
            return 0.0;
        }
        let ax = x.abs();
        match self.kind {
            WeightKind::RPlus => ax * ar,
            WeightKind::RMinus => ar / ax,
            WeightKind::AbsR => ar,
            WeightKind::Eta(a) => {
                if a.0 == 0.0 {
                    (SQRT_2 - 1.0) * ar
                } else {
                    // sqrt(t+1) - sqrt(t) without cancellation
                    let t = ax.powf(a.0);
                    ar / ((t + 1.0).sqrt() + ax.powf(0.5 * a.0))
                }
            }
            WeightKind::Omega(a) => ax.powf(0.5 * a.0) * ar,
            WeightKind::EtaTilde(a) => ar / ax.powf(0.5 * a.0),
        }
    }

    fn epsilon(&self) -> f64 {
        self.base.epsilon
    }

    fn tail_exponent(&self) -> Option<f64> {
        let s = self.base.tail_power?;
        Some(match self.kind {
            WeightKind::RPlus => s + 1.0,
            WeightKind::RMinus => s - 1.0,
            WeightKind::AbsR => s,
            WeightKind::Eta(a) | WeightKind::EtaTilde(a) => s - 0.5 * a.0,
            WeightKind::Omega(a) => s + 0.5 * a.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// Vanishes for `|x| > k`.
    Compact(f64),
    Full,
}

impl Support {
    pub fn bound(self) -> Option<f64> {
        match self {
            Support::Compact(k) => Some(k),
            Support::Full => None,
        }
    }

    fn union(self, other: Support) -> Support {
        match (self, other) {
            (Support::Compact(a), Support::Compact(b)) => Support::Compact(a.max(b)),
            _ => Support::Full,
        }
    }

    fn intersect(self, other: Support) -> Support {
        match (self, other) {
            (Support::Compact(a), Support::Compact(b)) => Support::Compact(a.min(b)),
            (Support::Compact(a), Support::Full) | (Support::Full, Support::Compact(a)) => {
                Support::Compact(a)
            }
            (Support::Full, Support::Full) => Support::Full,
        }
    }
}

/// Complex function on the real line with parity, support and tail metadata.
///
/// `breakpoints` lists points where the rule may jump; quadrature places
/// panel edges there. Metadata never changes the rule itself.
#[derive(Clone)]
pub struct TestFunction {
    rule: FunctionRule,
    parity: Parity,
    support: Support,
    tail_exponent: Option<f64>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("parity", &self.parity)
            .field("support", &self.support)
            .field("tail_exponent", &self.tail_exponent)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl TestFunction {
    pub fn new(rule: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            rule: Arc::new(rule),
            parity: Parity::None,
            support: Support::Full,
            tail_exponent: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn real(rule: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x| Complex64::new(rule(x), 0.0))
    }

    pub fn zero() -> Self {
        Self::new(|_| Complex64::new(0.0, 0.0))
            .with_parity(Parity::Even)
            .with_support(Support::Compact(0.0))
    }

    /// Indicator of the half-open interval `(lo, hi]`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::piecewise_constant(&[(lo, hi, Complex64::new(1.0, 0.0))])
    }

    /// Sum of `value * indicator((lo, hi])` over the given pieces.
    pub fn piecewise_constant(pieces: &[(f64, f64, Complex64)]) -> Self {
        let owned: Vec<(f64, f64, Complex64)> = pieces.to_vec();
        let bound = owned
            .iter()
            .map(|&(lo, hi, _)| lo.abs().max(hi.abs()))
            .fold(0.0, f64::max);
        let mut breakpoints: Vec<f64> = owned.iter().flat_map(|&(lo, hi, _)| [lo, hi]).collect();
        sort_dedup(&mut breakpoints);
        let rule = move |x: f64| {
            owned
                .iter()
                .filter(|&&(lo, hi, _)| x > lo && x <= hi)
                .map(|&(_, _, v)| v)
                .sum::<Complex64>()
        };
        Self::new(rule)
            .with_support(Support::Compact(bound))
            .with_breakpoints(breakpoints)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn with_tail_exponent(mut self, p: Option<f64>) -> Self {
        self.tail_exponent = p;
        self
    }

    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.extend_from_slice(&self.breakpoints);
        sort_dedup(&mut breakpoints);
        self.breakpoints = breakpoints;
        self
    }

    /// Same rule with the tail exponent dropped, forcing purely numeric decisions.
    pub fn without_tail_exponent(&self) -> Self {
        self.clone().with_tail_exponent(None)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.rule)(x)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Breakpoints reflected through the origin as well.
    pub fn symmetric_breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.breakpoints.iter().flat_map(|&x| [x, -x]).collect();
        sort_dedup(&mut b);
        b
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        let rule = self.rule.clone();
        Self {
            rule: Arc::new(move |x| c * rule(x)),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &TestFunction) -> Self {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &TestFunction) -> Self {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &TestFunction, sign: Complex64) -> Self {
        let (a, b) = (self.rule.clone(), other.rule.clone());
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::None
        };
        // Equal leading powers may cancel, so the sum's power is only known
        // when one term strictly dominates.
        let tail_exponent = match (self.tail_exponent, other.tail_exponent) {
            (Some(p), Some(q)) if p != q => Some(p.max(q)),
            (Some(p), None) if other.support != Support::Full => Some(p),
            (None, Some(q)) if self.support != Support::Full => Some(q),
            _ => None,
        };
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend_from_slice(&other.breakpoints);
        sort_dedup(&mut breakpoints);
        Self {
            rule: Arc::new(move |x| a(x) + sign * b(x)),
            parity,
            support: self.support.union(other.support),
            tail_exponent,
            breakpoints,
        }
    }

    /// Multiplies by the indicator described by `contains`. `support` bounds
    /// the indicator's set, `cuts` are its boundary points.
    pub fn restrict(
        &self,
        contains: impl Fn(f64) -> bool + Send + Sync + 'static,
        support: Support,
        cuts: &[f64],
    ) -> Self {
        let rule = self.rule.clone();
        let new_support = self.support.intersect(support);
        Self {
            rule: Arc::new(move |x| {
                if contains(x) {
                    rule(x)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
            parity: Parity::None,
            support: new_support,
            tail_exponent: match new_support {
                Support::Full => self.tail_exponent,
                Support::Compact(_) => None,
            },
            breakpoints: self.breakpoints.clone(),
        }
        .with_breakpoints(cuts.to_vec())
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.retain(|x| x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup();
}

fn check_tau(tau: f64) -> Result<(), ModelError> {
    if tau.is_finite() && (0.0..=2.0).contains(&tau) {
        Ok(())
    } else {
        Err(ModelError::TauOutOfRange(tau))
    }
}

/// Odd function `sgn(x) / (sqrt|r(x)| |x|^((tau+2)/4))`, zero on the gap.
pub fn make_f_tau(tau: f64, w: &ModelWeight) -> Result<TestFunction, ModelError> {
    check_tau(tau)?;
    let r = w.clone();
    let eps = w.epsilon();
    let power = (tau + 2.0) / 4.0;
    let rule = move |x: f64| {
        let rx = r.eval(x);
        if rx == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let v = 1.0 / (rx.abs().sqrt() * x.abs().powf(power));
        Complex64::new(v.copysign(x), 0.0)
    };
    Ok(TestFunction::new(rule)
        .with_parity(Parity::Odd)
        .with_tail_exponent(w.tail_power().map(|s| -0.5 * s - power))
        .with_breakpoints(vec![-eps, eps]))
}

/// Even function `1 / (sqrt|r(x)| |x|^((2-tau)/4))`, zero on the gap.
pub fn make_g_tau(tau: f64, w: &ModelWeight) -> Result<TestFunction, ModelError> {
    check_tau(tau)?;
    let r = w.clone();
    let eps = w.epsilon();
    let power = (2.0 - tau) / 4.0;
    let rule = move |x: f64| {
        let rx = r.eval(x);
        if rx == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(1.0 / (rx.abs().sqrt() * x.abs().powf(power)), 0.0)
    };
    Ok(TestFunction::new(rule)
        .with_parity(Parity::Even)
        .with_tail_exponent(w.tail_power().map(|s| -0.5 * s - power))
        .with_breakpoints(vec![-eps, eps]))
}

/// `(f(x) + f(-x)) / 2`.
pub fn even_part(f: &TestFunction) -> TestFunction {
    match f.parity {
        Parity::Even => f.clone(),
        Parity::Odd => TestFunction::zero(),
        Parity::None => {
            let rule = f.rule.clone();
            TestFunction {
                rule: Arc::new(move |x| 0.5 * (rule(x) + rule(-x))),
                parity: Parity::Even,
                support: f.support,
                tail_exponent: None,
                breakpoints: f.symmetric_breakpoints(),
            }
        }
    }
}

/// `(f(x) - f(-x)) / 2`.
pub fn odd_part(f: &TestFunction) -> TestFunction {
    match f.parity {
        Parity::Odd => f.clone(),
        Parity::Even => TestFunction::zero(),
        Parity::None => {
            let rule = f.rule.clone();
            TestFunction {
                rule: Arc::new(move |x| 0.5 * (rule(x) - rule(-x))),
                parity: Parity::Odd,
                support: f.support,
                tail_exponent: None,
                breakpoints: f.symmetric_breakpoints(),
            }
        }
    }
}

/// `chi_[-k,k] f`.
pub fn truncate(f: &TestFunction, k: f64) -> TestFunction {
    let parity = f.parity;
    f.restrict(move |x| x.abs() <= k, Support::Compact(k), &[-k, k])
        .with_parity(parity)
}
