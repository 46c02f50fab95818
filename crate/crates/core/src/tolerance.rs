//! Numerical tolerances shared by every module.
//!
//! Defaults match the documented contracts; the CLI overrides individual
//! fields with `--tol KEY=VALUE`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// Accepted `max |M - M^dag|` when building a `HermitianMatrix`, relative to `max(1, |M|_max)`.
    pub hermitian: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below `jacobi * |M|_F`.
    pub jacobi: f64,
    pub max_sweeps: usize,
    /// Eigenvalues at or below this are treated as zero when taking `log rho`.
    pub rank: f64,
    /// Trace defect accepted for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub psd: f64,
    pub prop_trace: f64,
    pub prop_min_eig: f64,
    pub prop_hermitian: f64,
    /// A claim quantity counts as zero when `|x| <= claim_zero * scale`.
    pub claim_zero: f64,
    /// Agreement required between two evaluations of the same quantity.
    pub consistency: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            jacobi: 1e-13,
            max_sweeps: 100,
            rank: 1e-12,
            trace: 1e-10,
            psd: 1e-10,
            prop_trace: 1e-8,
            prop_min_eig: 1e-8,
            prop_hermitian: 1e-10,
            claim_zero: 1e-10,
            consistency: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub const KEYS: [&'static str; 11] = [
        "hermitian",
        "jacobi",
        "max_sweeps",
        "rank",
        "trace",
        "psd",
        "prop_trace",
        "prop_min_eig",
        "prop_hermitian",
        "claim_zero",
        "consistency",
    ];

    /// Sets one field by name. Values must be positive and finite.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Parameter(format!(
                "tolerance {key} must be positive and finite, got {value}"
            )));
        }
        match key {
            "hermitian" => self.hermitian = value,
            "jacobi" => self.jacobi = value,
            "max_sweeps" => {
                if value.fract() != 0.0 {
                    return Err(Error::Parameter(format!(
                        "max_sweeps must be an integer, got {value}"
                    )));
                }
                self.max_sweeps = value as usize;
            }
            "rank" => self.rank = value,
            "trace" => self.trace = value,
            "psd" => self.psd = value,
            "prop_trace" => self.prop_trace = value,
            "prop_min_eig" => self.prop_min_eig = value,
            "prop_hermitian" => self.prop_hermitian = value,
            "claim_zero" => self.claim_zero = value,
            "consistency" => self.consistency = value,
            other => {
                return Err(Error::Parameter(format!(
                    "unknown tolerance key {other:?} (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}
