//! Fixed-step RK4 integration of the master equation.
//!
//! States are never renormalized or projected back onto the state space.
//! Each step is re-validated and its defects are recorded in the trajectory.

use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::matrix::{ComplexMatrix, HermitianMatrix};
use crate::state::DensityMatrix;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Grid spacing; zero for single-point trajectories.
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// `t0, t0 + h, ..., t0 + n h` with `n = round(horizon / h)`.
pub fn uniform_grid(t0: f64, horizon: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Parameter(format!("time step must be positive, got {step}")));
    }
    if !(horizon.is_finite() && horizon >= step) {
        return Err(Error::Parameter(format!(
            "horizon must be at least one step, got horizon {horizon} with step {step}"
        )));
    }
    if !t0.is_finite() {
        return Err(Error::Parameter("t0 must be finite".into()));
    }
    let n = (horizon / step).round() as usize;
    Ok((0..=n).map(|i| t0 + i as f64 * step).collect())
}

fn check_grid(grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Parameter("time grid is empty".into()));
    }
    if grid.len() == 1 {
        return Ok(0.0);
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) {
        return Err(Error::Parameter("time grid must be strictly increasing".into()));
    }
    for (i, w) in grid.windows(2).enumerate() {
        let dh = w[1] - w[0];
        if !(dh > 0.0) {
            return Err(Error::Parameter(format!("time grid not increasing at index {}", i + 1)));
        }
        if (dh - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Parameter(format!("time grid not uniform at index {}", i + 1)));
        }
    }
    Ok(h)
}

fn rk4_step(model: &LindbladModel, x: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let k1 = model.generator(x);
    let k2 = model.generator(&(x + &k1.scale_real(0.5 * h)));
    let k3 = model.generator(&(x + &k2.scale_real(0.5 * h)));
    let k4 = model.generator(&(x + &k3.scale_real(h)));
    let sum = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
    x + &sum.scale_real(h / 6.0)
}

fn validate(x: &ComplexMatrix, step: usize, tol: &ToleranceConfig) -> Result<(DensityMatrix, StepDiagnostics)> {
    let trace_defect = (x.trace() - 1.0).norm();
    let hermiticity_defect = x.hermiticity_defect();
    let fail = |min_eigenvalue: f64| Error::Propagation {
        step,
        trace_defect,
        hermiticity_defect,
        min_eigenvalue,
    };
    x.ensure_finite().map_err(|_| fail(f64::NAN))?;
    let herm = HermitianMatrix::with_tolerance(x.clone(), tol.prop_hermitian).map_err(|_| fail(f64::NAN))?;
    let spectrum_tol = ToleranceConfig {
        trace: tol.prop_trace,
        psd: tol.prop_min_eig,
        ..*tol
    };
    let min_eigenvalue = herm.eig().map_err(|_| fail(f64::NAN))?.min_eigenvalue();
    if trace_defect > tol.prop_trace || min_eigenvalue < -tol.prop_min_eig {
        return Err(fail(min_eigenvalue));
    }
    let state = DensityMatrix::with_tolerance(herm, &spectrum_tol).map_err(|_| fail(min_eigenvalue))?;
    Ok((
        state,
        StepDiagnostics {
            trace_defect,
            hermiticity_defect,
            min_eigenvalue,
        },
    ))
}

pub fn propagate(model: &LindbladModel, rho0: &DensityMatrix, grid: &[f64]) -> Result<Trajectory> {
    propagate_with(model, rho0, grid, &ToleranceConfig::default())
}

pub fn propagate_with(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &[f64],
    tol: &ToleranceConfig,
) -> Result<Trajectory> {
    match propagate_partial(model, rho0, grid, tol) {
        (traj, None) => Ok(traj),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`propagate_with`] but hands back every state computed before a
/// failure together with the error.
pub fn propagate_partial(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &[f64],
    tol: &ToleranceConfig,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory::default();
    if model.dim() != rho0.dim() {
        return (traj, Some(Error::dim(model.dim(), rho0.dim())));
    }
    let h = match check_grid(grid) {
        Ok(h) => h,
        Err(e) => return (traj, Some(e)),
    };
    let mut x = rho0.as_hermitian().as_matrix().clone();
    for (step, &t) in grid.iter().enumerate() {
        if step > 0 {
            x = rk4_step(model, &x, h);
        }
        match validate(&x, step, tol) {
            Ok((state, diag)) => {
                traj.times.push(t);
                traj.states.push(state);
                traj.diagnostics.push(diag);
            }
            Err(e) => return (traj, Some(e)),
        }
    }
    (traj, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::JumpChannel;
    use crate::matrix::qubit::*;

    fn decay() -> LindbladModel {
        LindbladModel::new(
            HermitianMatrix::from_real_diag(&[0.0, 1.0]),
            vec![JumpChannel::new(1.0, sigma_minus()).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = uniform_grid(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(uniform_grid(0.0, 0.1, 0.25).is_err());
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let err = propagate(&decay(), &rho, &[0.0, 0.1, 0.3]).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        assert!(propagate(&decay(), &rho, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_generator_keeps_state_constant() {
        let model = LindbladModel::unitary(HermitianMatrix::zeros(2)).unwrap();
        let rho = DensityMatrix::from_matrix(
            ComplexMatrix::from_real(2, &[0.7, 0.2, 0.2, 0.3]).unwrap(),
        )
        .unwrap();
        let traj = propagate(&model, &rho, &uniform_grid(0.0, 1.0, 0.1).unwrap()).unwrap();
        assert_eq!(traj.len(), 11);
        for s in &traj.states {
            assert_eq!(s, &rho);
        }
    }

    #[test]
    fn exponential_decay() {
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        let grid = uniform_grid(0.0, 5.0, 1e-3).unwrap();
        let traj = propagate(&decay(), &rho, &grid).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s[(1, 1)].re - (-t).exp()).abs() <= 1e-6);
        }
        for d in &traj.diagnostics {
            assert!(d.trace_defect <= 1e-8);
            assert!(d.hermiticity_defect <= 1e-10);
        }
    }

    #[test]
    fn tolerance_breach_reports_step() {
        let model = LindbladModel::new(
            HermitianMatrix::from_real_diag(&[0.0, 1.0]),
            vec![JumpChannel::new(50.0, sigma_minus()).unwrap()],
        )
        .unwrap();
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        // h * rate = 5 lies outside the RK4 stability region
        let grid = uniform_grid(0.0, 1.0, 0.1).unwrap();
        let (partial, err) = propagate_partial(&model, &rho, &grid, &ToleranceConfig::default());
        match err {
            Some(Error::Propagation { step, min_eigenvalue, .. }) => {
                assert_eq!(partial.len(), step);
                assert!(step >= 1);
                assert!(min_eigenvalue < 0.0 || min_eigenvalue.is_nan());
            }
            other => panic!("expected propagation error, got {other:?}"),
        }
    }
}
