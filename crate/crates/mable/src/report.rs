//! Fit report document: a schema-versioned JSON file that fully determines
//! downstream outputs (density grids, bootstrap summaries).

use mable_core::{Degree, Error, FitResult, MixtureWeights, Result, TiltCoefficients};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepEntry {
    pub m: usize,
    pub loglik: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitReportFile {
    pub schema_version: u32,
    /// support of the original-scale data
    pub support: [f64; 2],
    /// polynomial degree of the regressor r(y)
    pub regressor_degree: usize,
    /// selected (or fixed) Bernstein degree
    pub m: usize,
    /// degree lower bounds of the two groups as given
    pub mb: [usize; 2],
    /// whether the groups were exchanged before fitting
    pub swapped: bool,
    /// selection mode: "full", "profile", or "fixed"
    pub mode: String,
    /// tilt coefficients against the original-scale regressor, original
    /// group orientation
    pub alpha: Vec<f64>,
    /// bootstrap standard errors, when computed
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_se: Option<Vec<f64>>,
    pub p: Vec<f64>,
    pub loglik: f64,
    pub constraint_residual: f64,
    /// (m, loglik) trace of the degree sweep; empty for fixed-degree fits
    pub sweep: Vec<SweepEntry>,
}

impl FitReportFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Domain(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.support[1] <= self.support[0] {
            return Err(Error::Domain("support must satisfy a < b".into()));
        }
        if self.p.len() != self.m + 1 {
            return Err(Error::Domain(format!(
                "p has {} entries, expected m + 1 = {}",
                self.p.len(),
                self.m + 1
            )));
        }
        if self.alpha.len() != self.regressor_degree + 1 {
            return Err(Error::Domain(format!(
                "alpha has {} entries, expected d + 1 = {}",
                self.alpha.len(),
                self.regressor_degree + 1
            )));
        }
        Ok(())
    }

    /// Reconstruct the core fit (working orientation: alpha negated back if
    /// the groups were swapped).
    pub fn to_fit(&self) -> Result<FitResult> {
        self.validate()?;
        let sign = if self.swapped { -1.0 } else { 1.0 };
        Ok(FitResult {
            m: Degree::new(self.m)?,
            alpha: TiltCoefficients::new(self.alpha.iter().map(|a| sign * a).collect())?,
            p: MixtureWeights::new(self.p.clone())?,
            loglik: self.loglik,
            em_iterations: 0,
            constraint_residual: self.constraint_residual,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: FitReportFile =
            serde_json::from_str(s).map_err(|e| Error::Domain(format!("bad report: {e}")))?;
        report.validate()?;
        Ok(report)
    }
}

/// Write a file atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)?;
    Ok(())
}
