//! Pass/fail records with measured deviation and tolerance.

use std::fmt;
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub property: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `deviation <= tolerance` (NaN fails).
    pub fn within(property: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            property: property.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }

    pub fn flag(property: impl Into<String>, passed: bool) -> Self {
        Self {
            property: property.into(),
            deviation: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (deviation {:e}, tolerance {:e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.property,
            self.deviation,
            self.tolerance
        )
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Observations that are reported but not asserted.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Prefixes every property name.
    pub fn scoped(mut self, scope: &str) -> Self {
        for c in &mut self.checks {
            c.property = format!("{scope}/{}", c.property);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_deviation(&self, property_suffix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.property.ends_with(property_suffix))
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "property,deviation,tolerance,passed")?;
        for c in &self.checks {
            writeln!(
                out,
                "{},{},{},{}",
                csv_field(&c.property),
                c.deviation,
                c.tolerance,
                c.passed
            )?;
        }
        Ok(())
    }
}
