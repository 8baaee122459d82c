//! Plain-text run configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use kcl_core::model_space::{Alpha, ModelWeight};
use kcl_core::quadrature::QuadratureConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub epsilon: f64,
    pub tail_power: f64,
    pub rule: String,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            tail_power: 0.0,
            rule: "default".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub k0: f64,
    pub doublings: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            k0: q.k0,
            doublings: q.doublings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub weight: WeightConfig,
    pub quadrature: QuadratureSection,
    pub alpha: Vec<f64>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            weight: WeightConfig::default(),
            quadrature: QuadratureSection::default(),
            alpha: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            out: PathBuf::from("kcl-out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn model_weight(&self) -> Result<ModelWeight, String> {
        if self.weight.rule != "default" {
            return Err(format!("unsupported weight.rule {:?}", self.weight.rule));
        }
        ModelWeight::power(self.weight.epsilon, self.weight.tail_power).map_err(|e| e.to_string())
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, String> {
        let q = QuadratureConfig {
            rel_tol: self.quadrature.rel_tol,
            abs_tol: self.quadrature.abs_tol,
            k0: self.quadrature.k0,
            doublings: self.quadrature.doublings,
            ..QuadratureConfig::default()
        };
        q.validate().map_err(|e| e.to_string())?;
        if q.k0 <= self.weight.epsilon {
            return Err(format!(
                "quadrature.k0 = {} must exceed weight.epsilon = {}",
                q.k0, self.weight.epsilon
            ));
        }
        Ok(q)
    }

    pub fn alphas(&self) -> Result<Vec<Alpha>, String> {
        if self.alpha.is_empty() {
            return Err("alpha list is empty".into());
        }
        self.alpha
            .iter()
            .map(|&a| Alpha::new(a).map_err(|e| e.to_string()))
            .collect()
    }

    /// FNV-1a over the canonical serialization, for provenance. The output
    /// directory is excluded so relocated runs hash alike.
    pub fn hash(&self) -> String {
        let canonical = Self {
            out: PathBuf::new(),
            ..self.clone()
        };
        let text = toml::to_string(&canonical).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// `a,b,c` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {t:?}"))
        })
        .collect()
}

/// `lo..hi` as the doubling schedule `lo, 2lo, ...` up to `hi`, or a plain list.
pub fn parse_k_range(s: &str) -> Result<Vec<f64>, String> {
    let Some((lo, hi)) = s.split_once("..") else {
        let ks = parse_list(s)?;
        return if ks.iter().all(|k| k.is_finite() && *k > 0.0) {
            Ok(ks)
        } else {
            Err(format!("k values must be positive: {s:?}"))
        };
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range start in {s:?}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range end in {s:?}"))?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(format!("range must satisfy 0 < lo <= hi: {s:?}"));
    }
    let mut ks = Vec::new();
    let mut k = lo;
    while k <= hi * (1.0 + 1e-12) {
        ks.push(k);
        k *= 2.0;
    }
    Ok(ks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_range() {
        assert_eq!(parse_k_range("2..16").unwrap(), vec![2.0, 4.0, 8.0, 16.0]);
        assert_eq!(parse_k_range("3,5").unwrap(), vec![3.0, 5.0]);
        assert!(parse_k_range("8..2").is_err());
        assert!(parse_k_range("0..2").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[weight]\nepsilon = 2.0\nfoo = 1").is_err());
        let c: RunConfig = toml::from_str("[weight]\nepsilon = 0.5").unwrap();
        assert_eq!(c.weight.epsilon, 0.5);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn empty_config_is_default() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.hash(), RunConfig::default().hash());
    }

    #[test]
    fn k0_inside_gap_rejected() {
        let mut c = RunConfig::default();
        c.weight.epsilon = 3.0;
        assert!(c.quadrature().is_err());
    }
}
