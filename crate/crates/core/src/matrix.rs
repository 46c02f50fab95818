//! Dense complex matrices and Hermitian spectral calculus.
//!
//! Everything here is `O(d^3)` dense arithmetic sized for small Hilbert
//! spaces (a few dozen levels at most). Storage is row-major.

use std::fmt;
use std::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square `d x d` complex matrix with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::dim(dim * dim, data.len()));
        }
        let m = Self { dim, data };
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::dim(dim, row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|a><b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal lengths");
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    /// `|i><j|` in the computational basis.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        Self::from_fn(dim, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.dim)
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, k)]).collect()
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some(pos) => Err(Error::NonFinite {
                row: pos / self.dim,
                col: pos % self.dim,
            }),
            None => Ok(()),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::dim(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Checked product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self * other)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        self.rows()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `U^dag M U`: components of `self` in the basis given by the columns of `u`.
    pub fn in_basis(&self, u: &ComplexMatrix) -> Self {
        &(&u.adjoint() * self) * u
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dag|`
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut defect: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.rows() {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A complex matrix that was Hermitian at construction, stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
    defect: f64,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, ToleranceConfig::default().hermitian)
    }

    /// Accepts `m` when `max |M - M^dag| <= tol * max(1, |M|_max)`, then
    /// replaces it by `(M + M^dag) / 2`.
    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        m.ensure_finite()?;
        let defect = m.hermiticity_defect();
        if defect > tol * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let d = m.dim;
        let inner = ComplexMatrix::from_fn(d, |i, j| {
            if i == j {
                C64::new(m[(i, i)].re, 0.0)
            } else if i < j {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            } else {
                (m[(j, i)] + m[(i, j)].conj()).conj() * 0.5
            }
        });
        Ok(Self { inner, defect })
    }

    pub fn from_real_diag(values: &[f64]) -> Self {
        Self {
            inner: ComplexMatrix::diag_real(values),
            defect: 0.0,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::zeros(dim),
            defect: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(dim),
            defect: 0.0,
        }
    }

    /// Hermiticity defect of the matrix this was built from, before symmetrization.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    /// Real trace.
    pub fn trace_re(&self) -> f64 {
        self.inner.trace().re
    }

    /// `self + c I`
    pub fn shifted(&self, c: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.dim {
            inner[(i, i)] += c;
        }
        Self { inner, defect: 0.0 }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.scale_real(factor),
            defect: 0.0,
        }
    }

    pub fn eig(&self) -> Result<Spectrum> {
        hermitian_eig(self)
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.inner
    }
}

impl AsRef<ComplexMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.inner
    }
}

/// Eigendecomposition `M = U diag(lambda) U^dag` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U diag(values) U^dag`, exactly Hermitian by construction.
    pub fn compose(&self, values: &[f64]) -> HermitianMatrix {
        assert_eq!(values.len(), self.dim(), "eigenvalue count mismatch");
        let d = self.dim();
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = ZERO;
                for (k, &f) in values.iter().enumerate() {
                    acc += u[(i, k)] * f * u[(j, k)].conj();
                }
                if i == j {
                    out[(i, i)] = C64::new(acc.re, 0.0);
                } else {
                    out[(i, j)] = acc;
                    out[(j, i)] = acc.conj();
                }
            }
        }
        HermitianMatrix {
            inner: out,
            defect: 0.0,
        }
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.compose(&self.eigenvalues)
    }

    /// `U diag(f(lambda)) U^dag`; fails on the first eigenvalue where `f` is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&lambda| {
                let v = f(lambda);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Domain { eigenvalue: lambda })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.compose(&values))
    }

    /// Natural logarithm, defined only when every eigenvalue exceeds `floor`.
    pub fn log(&self, floor: f64) -> Result<HermitianMatrix> {
        if let Some(&bad) = self.eigenvalues.iter().find(|&&l| l <= floor) {
            return Err(Error::Domain { eigenvalue: bad });
        }
        self.map(f64::ln)
    }
}

/// `ab - ba`
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dim(b)?;
    let c = &(a * b) - &(b * a);
    c.ensure_finite()?;
    Ok(c)
}

/// `{a, b} = ab + ba`
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dim(b)?;
    Ok(&(a * b) + &(b * a))
}

/// `|A|^2 = A A^dag`
pub fn abs_sq(a: &ComplexMatrix) -> Result<HermitianMatrix> {
    let d = a.dim;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let acc: C64 = (0..d).map(|k| a[(i, k)] * a[(j, k)].conj()).sum();
            if i == j {
                out[(i, i)] = C64::new(acc.re, 0.0);
            } else {
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
    }
    out.ensure_finite()?;
    Ok(HermitianMatrix {
        inner: out,
        defect: 0.0,
    })
}

pub fn hermitian_eig(m: &HermitianMatrix) -> Result<Spectrum> {
    hermitian_eig_with(m, &ToleranceConfig::default())
}

/// Cyclic complex Jacobi.
///
/// Each rotation `J = D R D^dag` strips the phase of `a_pq` with
/// `D = diag(1, e^{-i phi})` on the `(p, q)` plane and then applies the real
/// symmetric Jacobi rotation `R`. Output is sorted ascending (ties keep the
/// diagonal position order) and every eigenvector is rephased so that its
/// largest-magnitude component is real positive.
pub fn hermitian_eig_with(m: &HermitianMatrix, tol: &ToleranceConfig) -> Result<Spectrum> {
    m.ensure_finite()?;
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let target = tol.jacobi * norm;

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0 || off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < tol.max_sweeps {
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + theta.hypot(1.0))
                } else {
                    -1.0 / (-theta + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let j_pq = phase * s;
                let j_qp = -phase.conj() * s;

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * c;
                }
                // A <- J^dag A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * j_qp.conj();
                    a[(q, k)] = apk * j_pq.conj() + aqk * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * c;
                }
            }
        }
        converged = off_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps,
            residual: off_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so exact ties keep diagonal order
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let mut lead = 0;
        let mut lead_mag = -1.0;
        for i in 0..n {
            let mag = v[(i, k)].norm();
            if mag > lead_mag {
                lead_mag = mag;
                lead = i;
            }
        }
        let z = v[(lead, k)];
        let fix = if lead_mag > 0.0 { z.conj() / lead_mag } else { ONE };
        for i in 0..n {
            vectors[(i, col)] = v[(i, k)] * fix;
        }
        vectors[(lead, col)] = C64::new(vectors[(lead, col)].norm(), 0.0);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// `U diag(f(lambda)) U^dag`. Fails with `Error::Domain` where `f` is not finite.
pub fn matrix_function(m: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    hermitian_eig(m)?.map(f)
}

/// Matrix logarithm; eigenvalues at or below `floor` are rejected.
pub fn matrix_log(m: &HermitianMatrix, floor: f64) -> Result<HermitianMatrix> {
    hermitian_eig(m)?.log(floor)
}

pub fn matrix_exp(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_function(m, f64::exp)
}

/// Pauli and ladder operators on a qubit, basis `{|0>, |1>}`.
pub mod qubit {
    use super::{ComplexMatrix, C64, ONE, ZERO};

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        })
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    /// `|1><0|`, raises `|0>` to `|1>`.
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::unit(2, 1, 0)
    }

    /// `|0><1|`
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::unit(2, 0, 1)
    }
}

/// Truncated bosonic lowering operator `a = sum_n sqrt(n) |n-1><n|`.
pub fn lowering(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::qubit::*;
    use super::*;
    use crate::random::{ginibre, random_hermitian, Rng};
    use rand::SeedableRng;

    fn rng(seed: u64) -> Rng {
        Rng::seed_from_u64(seed)
    }

    #[test]
    fn commutator_with_sigma_plus() {
        let h = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let c = commutator(&h, &sigma_plus()).unwrap();
        assert!(c.max_abs_diff(&sigma_plus()) == 0.0);
    }

    #[test]
    fn self_commutator_vanishes() {
        let a = ginibre(&mut rng(1), 4);
        assert!(commutator(&a, &a).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn diagonal_commutator_entries() {
        let mut r = rng(2);
        let w = [0.3, -1.2, 2.5, 0.7];
        let l = ginibre(&mut r, 4);
        let c = commutator(&ComplexMatrix::diag_real(&w), &l).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let expected = l[(i, k)] * (w[i] - w[k]);
                assert!((c[(i, k)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let err = commutator(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn abs_sq_examples() {
        let p = abs_sq(&sigma_plus()).unwrap();
        assert_eq!(p.as_matrix(), &ComplexMatrix::unit(2, 1, 1));
        assert_eq!(abs_sq(&ComplexMatrix::zeros(3)).unwrap().max_abs(), 0.0);

        let a = ginibre(&mut rng(3), 3);
        let got = abs_sq(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += a[(i, k)] * a[(j, k)].conj();
                }
                assert!((got[(i, j)] - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eig_diagonal_and_pauli() {
        let s = hermitian_eig(&HermitianMatrix::from_real_diag(&[5.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![2.0, 5.0]);
        assert_eq!(s.eigenvectors, ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap());

        let s = hermitian_eig(&HermitianMatrix::new(sigma_x()).unwrap()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_sigma_y_has_complex_vectors() {
        let m = HermitianMatrix::new(sigma_y()).unwrap();
        let s = hermitian_eig(&m).unwrap();
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-14);
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_exact_ties_keep_diagonal_order() {
        let s = hermitian_eig(&HermitianMatrix::from_real_diag(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0]);
        assert_eq!(s.eigenvector(1)[0], ONE);
        assert_eq!(s.eigenvector(2)[2], ONE);
    }

    #[test]
    fn eig_phase_convention() {
        let m = random_hermitian(&mut rng(4), 6, 1.0);
        let s = hermitian_eig(&m).unwrap();
        for k in 0..6 {
            let col = s.eigenvector(k);
            let lead = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best })
                .0;
            assert_eq!(col[lead].im, 0.0);
            assert!(col[lead].re > 0.0);
        }
    }

    #[test]
    fn eig_random_8x8_reconstructs() {
        let m = random_hermitian(&mut rng(5), 8, 3.0);
        let s = hermitian_eig(&m).unwrap();
        assert!(s.reconstruct().max_abs_diff(&m) <= 1e-10 * m.max_abs().max(1.0));
        let u = &s.eigenvectors;
        let gram = &u.adjoint() * u;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(8)) <= 1e-10);
    }

    #[test]
    fn eig_reports_non_convergence() {
        let m = random_hermitian(&mut rng(6), 6, 1.0);
        let tol = ToleranceConfig {
            max_sweeps: 1,
            ..ToleranceConfig::default()
        };
        match hermitian_eig_with(&m, &tol) {
            Err(Error::Convergence { sweeps, residual }) => {
                assert_eq!(sweeps, 1);
                assert!(residual > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_construction_rejects_and_symmetrizes() {
        let bad = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(HermitianMatrix::new(bad), Err(Error::NotHermitian { .. })));

        let nearly = ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0 + 1e-13, 0.0]).unwrap();
        let h = HermitianMatrix::new(nearly).unwrap();
        assert!(h.defect() > 0.0);
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = ComplexMatrix::from_real(2, &[0.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn matrix_function_examples() {
        let m = random_hermitian(&mut rng(7), 5, 2.0);
        assert!(matrix_function(&m, |x| x).unwrap().max_abs_diff(&m) < 1e-10);

        let half = HermitianMatrix::from_real_diag(&[0.5, 0.5]);
        let log = matrix_log(&half, 1e-12).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!(log.max_abs_diff(&ComplexMatrix::diag_real(&[-ln2, -ln2])) < 1e-15);
    }

    #[test]
    fn matrix_log_domain_error() {
        let m = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        assert_eq!(matrix_log(&m, 1e-12).unwrap_err(), Error::Domain { eigenvalue: 0.0 });
        let neg = HermitianMatrix::from_real_diag(&[-1.0, 2.0]);
        assert_eq!(
            matrix_function(&neg, f64::sqrt).unwrap_err(),
            Error::Domain { eigenvalue: -1.0 }
        );
    }

    #[test]
    fn exp_log_roundtrip_on_density_matrix() {
        let rho = crate::random::random_density_matrix(&mut rng(8), 4);
        let back = matrix_exp(&matrix_log(rho.as_hermitian(), 1e-12).unwrap()).unwrap();
        assert!(back.max_abs_diff(rho.as_hermitian()) <= 1e-9);
    }

    #[test]
    fn lowering_operator_entries() {
        let a = lowering(3);
        assert_eq!(a[(0, 1)], ONE);
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(1, 0)], ZERO);
    }
}
