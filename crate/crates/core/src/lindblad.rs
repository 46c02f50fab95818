//! GKSL generator `drho/dt = -i[H, rho] + sum_j gamma_j D_j[rho]` with
//! `D[rho] = L rho L^dag - {L^dag L, rho} / 2` and `hbar = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, HermitianMatrix, C64};
use crate::state::DensityMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpChannel {
    pub rate: f64,
    pub operator: ComplexMatrix,
}

impl JumpChannel {
    pub fn new(rate: f64, operator: ComplexMatrix) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Parameter(format!("channel rate must be finite and >= 0, got {rate}")));
        }
        Ok(Self { rate, operator })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    hamiltonian: HermitianMatrix,
    channels: Vec<JumpChannel>,
}

impl LindbladModel {
    pub fn new(hamiltonian: HermitianMatrix, channels: Vec<JumpChannel>) -> Result<Self> {
        let d = hamiltonian.dim();
        if d < 2 {
            return Err(Error::Parameter(format!("model dimension must be at least 2, got {d}")));
        }
        for ch in &channels {
            if ch.operator.dim() != d {
                return Err(Error::dim(d, ch.operator.dim()));
            }
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                return Err(Error::Parameter(format!("channel rate must be finite and >= 0, got {}", ch.rate)));
            }
        }
        Ok(Self { hamiltonian, channels })
    }

    pub fn unitary(hamiltonian: HermitianMatrix) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    /// Generator applied to an arbitrary matrix. Used by the integrator on
    /// intermediate Runge-Kutta stages, which need not be valid states.
    pub fn generator(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = self.hamiltonian.as_matrix();
        let minus_i = C64::new(0.0, -1.0);
        let mut out = (&(h * rho) - &(rho * h)).scale(minus_i);
        for ch in &self.channels {
            if ch.rate == 0.0 {
                continue;
            }
            let d = dissipator_raw(&ch.operator, rho);
            out = &out + &d.scale_real(ch.rate);
        }
        out
    }

    /// Largest scale in the model: `max(1, |H|_max, max_j gamma_j |L_j|_max^2)`.
    pub fn scale(&self) -> f64 {
        self.channels
            .iter()
            .map(|ch| ch.rate * ch.operator.max_abs().powi(2))
            .fold(self.hamiltonian.max_abs().max(1.0), f64::max)
    }
}

fn dissipator_raw(l: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let ldag = l.adjoint();
    let ldl = &ldag * l;
    let jump = &(l * rho) * &ldag;
    let anti = &(&ldl * rho) + &(rho * &ldl);
    &jump - &anti.scale_real(0.5)
}

pub fn dissipator(l: &ComplexMatrix, rho: &DensityMatrix) -> Result<HermitianMatrix> {
    if l.dim() != rho.dim() {
        return Err(Error::dim(rho.dim(), l.dim()));
    }
    hermitian_output(dissipator_raw(l, rho))
}

/// `drho/dt` for a valid state.
pub fn liouvillian(model: &LindbladModel, rho: &DensityMatrix) -> Result<HermitianMatrix> {
    if model.dim() != rho.dim() {
        return Err(Error::dim(model.dim(), rho.dim()));
    }
    hermitian_output(model.generator(rho))
}

fn hermitian_output(m: ComplexMatrix) -> Result<HermitianMatrix> {
    let defect = m.hermiticity_defect();
    let scale = m.max_abs().max(1.0);
    HermitianMatrix::with_tolerance(m, 1e-12).map_err(|_| Error::Consistency {
        what: "generator output is not Hermitian".into(),
        lhs: defect,
        rhs: 1e-12 * scale,
    })
}
