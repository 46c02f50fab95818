//! Seeded random matrix ensembles.
//!
//! All generators draw from a caller-owned ChaCha8 stream so that a seed
//! fully determines the output on every platform.

use rand::Rng as _;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{hermitian_eig, ComplexMatrix, HermitianMatrix, C64};
use crate::state::DensityMatrix;

pub type Rng = ChaCha8Rng;

/// Complex standard normal: real and imaginary parts i.i.d. N(0, 1/2), so `E|z|^2 = 1`.
pub fn complex_normal(rng: &mut Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix.
pub fn ginibre(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng))
}

/// `scale * (G + G^dag) / 2` for a Ginibre `G`.
pub fn random_hermitian(rng: &mut Rng, dim: usize, scale: f64) -> HermitianMatrix {
    let g = ginibre(rng, dim);
    let h = (&g + &g.adjoint()).scale_real(0.5 * scale);
    HermitianMatrix::new(h).expect("symmetrized Ginibre matrix is Hermitian")
}

/// Full-rank state `G G^dag / Tr(G G^dag)`.
pub fn random_density_matrix(rng: &mut Rng, dim: usize) -> DensityMatrix {
    loop {
        let g = ginibre(rng, dim);
        let gg = crate::matrix::abs_sq(&g).expect("finite Ginibre matrix");
        let tr = gg.trace_re();
        let rho = gg.scale_real(1.0 / tr);
        if let Ok(state) = DensityMatrix::new(rho) {
            if state.min_eigenvalue() > 1e-8 {
                return state;
            }
        }
    }
}

/// Unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, dim, 1.0);
    hermitian_eig(&h).expect("Jacobi converges on random input").eigenvectors
}

/// Uniform on `(0, 1]`.
pub fn unit_rate(rng: &mut Rng) -> f64 {
    1.0 - rng.random::<f64>()
}
