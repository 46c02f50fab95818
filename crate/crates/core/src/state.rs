//! Validated quantum states.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::matrix::{hermitian_eig_with, ComplexMatrix, HermitianMatrix, Spectrum, C64};
use crate::tolerance::ToleranceConfig;

/// Hermitian, unit-trace, positive semidefinite operator. The spectrum is
/// computed once at construction and kept alongside the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: HermitianMatrix,
    spectrum: Spectrum,
}

impl DensityMatrix {
    pub fn new(rho: HermitianMatrix) -> Result<Self> {
        Self::with_tolerance(rho, &ToleranceConfig::default())
    }

    /// Validates `|Tr rho - 1| <= tol.trace` and `min eig >= -tol.psd`.
    pub fn with_tolerance(rho: HermitianMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let trace_defect = (rho.trace_re() - 1.0).abs();
        if trace_defect > tol.trace {
            return Err(Error::InvalidState {
                reason: format!("trace defect {trace_defect:e} exceeds {:e}", tol.trace),
            });
        }
        let spectrum = hermitian_eig_with(&rho, tol)?;
        let min = spectrum.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::InvalidState {
                reason: format!("negative eigenvalue {min:e} below -{:e}", tol.psd),
            });
        }
        Ok(Self { rho, spectrum })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Parameter("state vector has zero norm".into()));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::from_matrix(ComplexMatrix::outer(&unit, &unit))
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Parameter(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Self::new(HermitianMatrix::from_real_diag(&diag))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(HermitianMatrix::from_real_diag(&vec![1.0 / dim as f64; dim]))
            .expect("I/d is a valid state")
    }

    /// Gibbs state `exp(-beta H) / Z`.
    pub fn thermal(h: &HermitianMatrix, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
        }
        let spec = h.eig()?;
        let ground = spec.min_eigenvalue();
        let weights: Vec<f64> = spec.eigenvalues.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        Self::new(spec.compose(&probs))
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min_eigenvalue()
    }

    pub fn trace_defect(&self) -> f64 {
        (self.rho.trace_re() - 1.0).abs()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    /// `Tr(rho A)` real part.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        self.rho.trace_product(a).re
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        self.rho.as_matrix()
    }
}

/// `-sum lambda ln lambda` in nats, eigenvalues clipped to `[0, 1]`, `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// `(1 - eps) rho + eps I / d`
pub fn regularize(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("regularization eps must lie in (0, 1), got {eps}")));
    }
    let d = rho.dim();
    let mixed = rho
        .as_hermitian()
        .scale_real(1.0 - eps)
        .shifted(eps / d as f64);
    DensityMatrix::new(mixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_matrix, random_unitary, Rng};
    use rand::SeedableRng;
    use std::f64::consts::LN_2;

    #[test]
    fn entropy_examples() {
        assert_eq!(DensityMatrix::basis_state(3, 1).unwrap().entropy(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((mixed.entropy() - LN_2).abs() < 1e-15);
        let rho = DensityMatrix::new(HermitianMatrix::from_real_diag(&[0.75, 0.25])).unwrap();
        let expected = -(0.75f64 * 0.75f64.ln()) - 0.25 * 0.25f64.ln();
        assert!((rho.entropy() - expected).abs() < 1e-15);
    }

    #[test]
    fn entropy_bounded_by_log_dim() {
        let mut rng = Rng::seed_from_u64(11);
        for d in 2..7 {
            let s = random_density_matrix(&mut rng, d).entropy();
            assert!(s >= 0.0 && s <= (d as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn entropy_unitary_invariance() {
        let mut rng = Rng::seed_from_u64(12);
        for d in 2..7 {
            let rho = random_density_matrix(&mut rng, d);
            let u = random_unitary(&mut rng, d);
            let rotated = &(&u * &rho) * &u.adjoint();
            let rotated = DensityMatrix::from_matrix(rotated).unwrap();
            assert!((rotated.entropy() - rho.entropy()).abs() <= 1e-10);
        }
    }

    #[test]
    fn construction_rejects_bad_trace_and_negativity() {
        let bad_trace = HermitianMatrix::from_real_diag(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidState { .. })));
        let negative = HermitianMatrix::from_real_diag(&[1.1, -0.1]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidState { .. })));
        assert!(DensityMatrix::basis_state(2, 2).is_err());
    }

    #[test]
    fn regularize_examples() {
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let r = regularize(&zero, 0.5).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::diag_real(&[0.75, 0.25])) < 1e-15);

        let mut rng = Rng::seed_from_u64(13);
        let rho = random_density_matrix(&mut rng, 3);
        let eps = 0.01;
        let r = regularize(&rho, eps).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3);
        let expected = eps * mixed.max_abs_diff(&rho);
        assert!((r.max_abs_diff(&rho) - expected).abs() < 1e-15);
        assert!(r.min_eigenvalue() >= eps / 3.0 - 1e-15);

        let again = regularize(&mixed, 0.3).unwrap();
        assert!(again.max_abs_diff(&mixed) < 1e-15);

        assert!(matches!(regularize(&zero, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(regularize(&zero, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn thermal_state_populations() {
        let h = HermitianMatrix::from_real_diag(&[0.0, 1.0]);
        let rho = DensityMatrix::thermal(&h, 1.0).unwrap();
        let z = 1.0 + (-1.0f64).exp();
        assert!((rho[(0, 0)].re - 1.0 / z).abs() < 1e-15);
        assert!((rho[(1, 1)].re - (-1.0f64).exp() / z).abs() < 1e-15);
    }
}
