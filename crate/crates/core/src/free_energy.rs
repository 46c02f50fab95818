//! Free energy operator `F = H + beta^{-1} ln rho`, its fluctuation
//! `dF = F - <F>`, the charging power `P = d<F>/dt`, and the commutator
//! fluctuation `Theta_j = <|[dF, L_j]|^2>` with `|A|^2 = A A^dag`.
//!
//! Two spectra appear below and are kept apart on purpose:
//! [`FreeEnergyDecomposition::w`] holds the eigenvalues of `dF` for a
//! full-rank state, while the eigenstate functions ([`theta_eigenstate`],
//! [`power_eigenstate`]) take the spectrum of `H` itself. Every formula
//! depends on `w` only through differences `w_i - w_k`, so the two agree up
//! to the constant shift `<F>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{dissipator, liouvillian, LindbladModel};
use crate::matrix::{abs_sq, commutator, ComplexMatrix, HermitianMatrix, Spectrum, C64, ZERO};
use crate::propagate::Trajectory;
use crate::state::{von_neumann_entropy, DensityMatrix};
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug)]
pub struct BatteryContext {
    beta: f64,
    model: LindbladModel,
    tol: ToleranceConfig,
}

impl BatteryContext {
    pub fn new(beta: f64, model: LindbladModel) -> Result<Self> {
        Self::with_tolerance(beta, model, ToleranceConfig::default())
    }

    pub fn with_tolerance(beta: f64, model: LindbladModel, tol: ToleranceConfig) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Parameter(format!("beta must be positive and finite, got {beta}")));
        }
        if !(tol.rank > 0.0) {
            return Err(Error::Parameter("rank threshold must be positive".into()));
        }
        Ok(Self { beta, model, tol })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn model(&self) -> &LindbladModel {
        &self.model
    }

    pub fn rank_threshold(&self) -> f64 {
        self.tol.rank
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        self.model.hamiltonian()
    }
}

#[derive(Clone, Debug)]
pub struct FreeEnergyDecomposition {
    /// `F`
    pub f_op: HermitianMatrix,
    /// `dF = F - <F> I`
    pub delta_f: HermitianMatrix,
    /// `<F> = Tr(F rho)`
    pub mean: f64,
    /// Eigenvalues of `dF`, ascending.
    pub w: Vec<f64>,
    /// Unitary whose columns are the eigenvectors of `dF`.
    pub basis: ComplexMatrix,
}

impl FreeEnergyDecomposition {
    /// Components `<i|A|k>` of `a` in the `dF` eigenbasis.
    pub fn components(&self, a: &ComplexMatrix) -> ComplexMatrix {
        a.in_basis(&self.basis)
    }
}

fn require_full_rank(rho: &DensityMatrix, threshold: f64) -> Result<()> {
    let smallest = rho.min_eigenvalue();
    if smallest <= threshold {
        Err(Error::RankDeficient { smallest, threshold })
    } else {
        Ok(())
    }
}

pub fn free_energy_operator(rho: &DensityMatrix, ctx: &BatteryContext) -> Result<FreeEnergyDecomposition> {
    let h = ctx.hamiltonian();
    if h.dim() != rho.dim() {
        return Err(Error::dim(h.dim(), rho.dim()));
    }
    require_full_rank(rho, ctx.rank_threshold())?;
    let log_rho = rho.spectrum().log(ctx.rank_threshold())?;
    let f_op = HermitianMatrix::new(h.as_matrix() + &log_rho.scale_real(1.0 / ctx.beta))?;

    let mean = rho.expectation(&f_op);
    let mean_entropy = mean_free_energy(rho, ctx);
    if (mean - mean_entropy).abs() > 1e-9 * mean.abs().max(1.0) {
        return Err(Error::Consistency {
            what: "Tr(F rho) disagrees with Tr(rho H) - S / beta".into(),
            lhs: mean,
            rhs: mean_entropy,
        });
    }

    let delta_f = f_op.shifted(-mean);
    let Spectrum {
        eigenvalues: w,
        eigenvectors: basis,
    } = crate::matrix::hermitian_eig_with(&delta_f, ctx.tolerances())?;
    Ok(FreeEnergyDecomposition {
        f_op,
        delta_f,
        mean,
        w,
        basis,
    })
}

/// `Tr(rho H) - S(rho) / beta`, defined for rank-deficient states as well.
pub fn mean_free_energy(rho: &DensityMatrix, ctx: &BatteryContext) -> f64 {
    rho.expectation(ctx.hamiltonian()) - von_neumann_entropy(rho) / ctx.beta
}

/// `P = Tr(drho/dt F)`. `Tr(drho/dt) = 0` makes the `d/dt ln rho` term drop out.
pub fn power_analytic(rho: &DensityMatrix, ctx: &BatteryContext) -> Result<f64> {
    let decomp = free_energy_operator(rho, ctx)?;
    power_with(rho, ctx, &decomp)
}

/// `Tr(drho/dt F)` reusing an existing decomposition of `rho`.
pub fn power_with(rho: &DensityMatrix, ctx: &BatteryContext, decomp: &FreeEnergyDecomposition) -> Result<f64> {
    let rate = liouvillian(ctx.model(), rho)?;
    Ok(rate.trace_product(&decomp.f_op).re)
}

/// Central difference of `<F>` on a uniform trajectory.
pub fn power_fd(traj: &Trajectory, ctx: &BatteryContext, index: usize) -> Result<f64> {
    if traj.len() < 3 || index < 1 || index + 1 >= traj.len() {
        return Err(Error::Parameter(format!(
            "finite-difference index {index} needs 1 <= index <= {}",
            traj.len().saturating_sub(2)
        )));
    }
    let before = mean_free_energy(&traj.states[index - 1], ctx);
    let after = mean_free_energy(&traj.states[index + 1], ctx);
    let span = traj.times[index + 1] - traj.times[index - 1];
    Ok((after - before) / span)
}

fn real_or_inconsistent(z: C64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::Consistency {
            what: format!("{what} has an imaginary residual"),
            lhs: z.re,
            rhs: z.im,
        });
    }
    Ok(z.re)
}

/// `Tr(rho C C^dag)` with `C = [dF, L]`.
pub fn theta_operator_form(
    decomp: &FreeEnergyDecomposition,
    rho: &DensityMatrix,
    l: &ComplexMatrix,
) -> Result<f64> {
    if l.dim() != rho.dim() {
        return Err(Error::dim(rho.dim(), l.dim()));
    }
    let c = commutator(&decomp.delta_f, l)?;
    let cc = abs_sq(&c)?;
    real_or_inconsistent(rho.trace_product(&cc), "operator-form Theta")
}

/// Index-form triple sum over components in the `dF` eigenbasis:
///
/// `Theta = sum_{i,k,l} rho_{lk} L^{ki} conj(L^{li}) (w_i^2 - w_i w_l - w_k w_i + w_l w_k)`
pub fn theta_index_form(w: &[f64], rho: &ComplexMatrix, l: &ComplexMatrix) -> Result<f64> {
    let d = w.len();
    if rho.dim() != d {
        return Err(Error::dim(d, rho.dim()));
    }
    if l.dim() != d {
        return Err(Error::dim(d, l.dim()));
    }
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            for ell in 0..d {
                let weight = w[i] * w[i] - w[i] * w[ell] - w[k] * w[i] + w[ell] * w[k];
                acc += rho[(ell, k)] * l[(k, i)] * l[(ell, i)].conj() * weight;
            }
        }
    }
    real_or_inconsistent(acc, "index-form Theta")
}

/// Theta for the pure state `|k0><k0|`, components in the `H` eigenbasis:
/// `sum_i |L^{k0 i}|^2 (w_i - w_k0)^2`.
pub fn theta_eigenstate(k0: usize, w: &[f64], l: &ComplexMatrix) -> Result<f64> {
    check_index(k0, w.len())?;
    if l.dim() != w.len() {
        return Err(Error::dim(w.len(), l.dim()));
    }
    Ok((0..w.len())
        .map(|i| l[(k0, i)].norm_sqr() * (w[i] - w[k0]).powi(2))
        .sum())
}

/// Same sum with the transposed index order, `sum_i |L^{i k0}|^2 (w_i - w_k0)^2`,
/// which equals `<k0| C^dag C |k0>`.
pub fn theta_eigenstate_transposed(k0: usize, w: &[f64], l: &ComplexMatrix) -> Result<f64> {
    check_index(k0, w.len())?;
    if l.dim() != w.len() {
        return Err(Error::dim(w.len(), l.dim()));
    }
    Ok((0..w.len())
        .map(|i| l[(i, k0)].norm_sqr() * (w[i] - w[k0]).powi(2))
        .sum())
}

fn check_index(k0: usize, dim: usize) -> Result<()> {
    if k0 >= dim {
        Err(Error::Parameter(format!("eigenstate index {k0} out of range for dimension {dim}")))
    } else {
        Ok(())
    }
}

/// The eigenstate `|k0>` of `H` and the spectrum it was taken from.
#[derive(Clone, Debug)]
pub struct Eigenstate {
    pub k0: usize,
    pub spectrum: Spectrum,
    pub state: DensityMatrix,
}

impl Eigenstate {
    pub fn of(h: &HermitianMatrix, k0: usize) -> Result<Self> {
        let spectrum = h.eig()?;
        check_index(k0, spectrum.dim())?;
        let state = DensityMatrix::pure(&spectrum.eigenvector(k0))?;
        Ok(Self { k0, spectrum, state })
    }

    pub fn energies(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// Components of `a` in the `H` eigenbasis.
    pub fn components(&self, a: &ComplexMatrix) -> ComplexMatrix {
        a.in_basis(&self.spectrum.eigenvectors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenstatePower {
    /// `sum_j gamma_j Tr(D_j[|k0><k0|] H)`
    pub trace_form: f64,
    /// `sum_j gamma_j sum_i |L_j^{i k0}|^2 (w_i - w_k0)`
    pub index_form: f64,
}

/// Both evaluations of the charging power at an eigenstate of `H`, with no agreement check.
pub fn power_eigenstate_forms(eig: &Eigenstate, model: &LindbladModel) -> Result<EigenstatePower> {
    let h = model.hamiltonian();
    let w = eig.energies();
    let k0 = eig.k0;
    let mut trace_form = 0.0;
    let mut index_form = 0.0;
    for ch in model.channels() {
        let d = dissipator(&ch.operator, &eig.state)?;
        trace_form += ch.rate * d.trace_product(h).re;
        let l = eig.components(&ch.operator);
        index_form += ch.rate * (0..w.len()).map(|i| l[(i, k0)].norm_sqr() * (w[i] - w[k0])).sum::<f64>();
    }
    Ok(EigenstatePower { trace_form, index_form })
}

/// Charging power at `rho = |k0><k0|`, `|k0>` the `k0`-th eigenvector of `H`.
/// The trace and index forms must agree within `consistency * max(1, |P|)`.
pub fn power_eigenstate(k0: usize, ctx: &BatteryContext) -> Result<f64> {
    let eig = Eigenstate::of(ctx.hamiltonian(), k0)?;
    let forms = power_eigenstate_forms(&eig, ctx.model())?;
    let limit = ctx.tolerances().consistency * forms.index_form.abs().max(1.0);
    if (forms.trace_form - forms.index_form).abs() > limit {
        return Err(Error::Consistency {
            what: "trace-form and index-form eigenstate power disagree".into(),
            lhs: forms.trace_form,
            rhs: forms.index_form,
        });
    }
    Ok(forms.index_form)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingCheck {
    /// The stated condition: `h_is_projector || channels_act_trivially`.
    pub holds: bool,
    /// `H = w_k0 |k0><k0|`
    pub h_is_projector: bool,
    /// Every `L_j` maps each nonzero-energy eigenvector `|v>` of `H` into `span{|v>}`.
    pub channels_act_trivially: bool,
    /// Per channel: largest `|L v - <v|L|v> v|` over nonzero-energy eigenvectors.
    pub channel_defects: Vec<f64>,
    /// Independently evaluated eigenstate Theta per channel.
    pub theta: Vec<f64>,
}

/// Evaluates the condition under which all eigenstate Theta_j are claimed to
/// vanish, alongside the Theta_j themselves so the two can be compared.
///
/// "Acting trivially on the range of H" is read as scalar action on each
/// eigenvector with nonzero eigenvalue.
pub fn vanishing_condition(ctx: &BatteryContext, k0: usize) -> Result<VanishingCheck> {
    const TOL: f64 = 1e-10;
    let h = ctx.hamiltonian();
    let eig = Eigenstate::of(h, k0)?;
    let w = eig.energies();

    let v0 = eig.spectrum.eigenvector(k0);
    let projector = ComplexMatrix::outer(&v0, &v0).scale_real(w[k0]);
    let h_is_projector = projector.max_abs_diff(h) <= TOL;

    let mut channel_defects = Vec::with_capacity(ctx.model().channels().len());
    let mut theta = Vec::with_capacity(channel_defects.capacity());
    for ch in ctx.model().channels() {
        let mut worst: f64 = 0.0;
        for (idx, &energy) in w.iter().enumerate() {
            if energy.abs() <= TOL {
                continue;
            }
            let v = eig.spectrum.eigenvector(idx);
            let lv = ch.operator.apply(&v);
            let overlap: C64 = v.iter().zip(&lv).map(|(a, b)| a.conj() * b).sum();
            let residual = lv
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - overlap * y).norm())
                .fold(0.0, f64::max);
            worst = worst.max(residual);
        }
        channel_defects.push(worst);
        theta.push(theta_eigenstate(k0, w, &eig.components(&ch.operator))?);
    }
    let channels_act_trivially = channel_defects.iter().all(|&d| d <= TOL);
    Ok(VanishingCheck {
        holds: h_is_projector || channels_act_trivially,
        h_is_projector,
        channels_act_trivially,
        channel_defects,
        theta,
    })
}
