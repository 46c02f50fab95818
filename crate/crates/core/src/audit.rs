//! Eigenstate audits, regularization sweeps and randomized claim checks.
//!
//! The battery state is taken to be an eigenstate `|k0>` of `H`, for which
//! `F = H` and the fluctuation `Theta_j` and charging power `P` have closed
//! forms. The audit evaluates those closed forms, cross-checks them against
//! direct operator evaluations, and tests the following claims:
//!
//! | id  | claim |
//! |-----|-------|
//! | `H`  | an eigenstate of `F` has zero charging power |
//! | `C1` | all `Theta_j = 0` implies `P = 0` |
//! | `C2` | `P = 0` implies all `Theta_j = 0` |
//! | `C3` | the vanishing condition holds iff all `Theta_j = 0` |
//!
//! `C1`-`C3` are evaluated twice: with `Theta_j = <k0|C C^dag|k0>` (row index
//! order `L^{k0 i}`) and with the transposed order `L^{i k0}`.
//!
//! A value counts as zero when `|x| <= tol`, nonzero when `|x| >= 10 tol`,
//! and anything in between makes the dependent verdict inconclusive. `tol` is
//! `claim_zero * max(1, |H|_max, max_j gamma_j |L_j|_max^2)`.

use rand::{Rng as _, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{
    power_eigenstate_forms, power_with, free_energy_operator, theta_eigenstate, theta_eigenstate_transposed,
    vanishing_condition, BatteryContext, Eigenstate, VanishingCheck,
};
use crate::lindblad::{liouvillian, JumpChannel, LindbladModel};
use crate::matrix::{ComplexMatrix, HermitianMatrix, C64};
use crate::propagate::propagate_with;
use crate::random::{complex_normal, ginibre, random_hermitian, unit_rate, Rng};
use crate::state::regularize;
use crate::tolerance::ToleranceConfig;

/// Width of the inconclusive band, as a multiple of the zero tolerance.
pub const STRADDLE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zeroness {
    Zero,
    Nonzero,
    Straddle,
}

pub fn classify(value: f64, tol: f64) -> Zeroness {
    let a = value.abs();
    if a <= tol {
        Zeroness::Zero
    } else if a >= STRADDLE_FACTOR * tol {
        Zeroness::Nonzero
    } else {
        Zeroness::Straddle
    }
}

/// Zeroness of "every value is zero".
fn all_zero(values: &[f64], tol: f64) -> Zeroness {
    let classes: Vec<Zeroness> = values.iter().map(|&v| classify(v, tol)).collect();
    if classes.contains(&Zeroness::Nonzero) {
        Zeroness::Nonzero
    } else if classes.contains(&Zeroness::Straddle) {
        Zeroness::Straddle
    } else {
        Zeroness::Zero
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClaimId {
    H,
    C1,
    C2,
    C3,
}

impl ClaimId {
    pub fn description(self) -> &'static str {
        match self {
            ClaimId::H => "an eigenstate of the free energy operator has zero charging power",
            ClaimId::C1 => "all Theta_j vanish implies P vanishes",
            ClaimId::C2 => "P vanishes implies all Theta_j vanish",
            ClaimId::C3 => "vanishing condition holds iff all Theta_j vanish",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexOrder {
    /// `sum_i |L^{k0 i}|^2 (w_i - w_k0)^2`
    Row,
    /// `sum_i |L^{i k0}|^2 (w_i - w_k0)^2`
    Column,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Confirmed,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScenarioVerdict {
    /// Some `Theta_j` and `P` are both nonzero.
    HypothesisRefuted,
    /// All `Theta_j` and `P` vanish.
    Consistent,
    /// Some `Theta_j` is nonzero while `P` vanishes.
    ThetaWithoutPower,
    /// All `Theta_j` vanish while `P` is nonzero.
    PowerWithoutTheta,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub theta: Vec<f64>,
    pub power: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim: ClaimId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_order: Option<IndexOrder>,
    pub status: ClaimStatus,
    pub witness: Witness,
}

/// `premise => conclusion` over tri-valued zeroness.
fn implication(premise: Zeroness, conclusion: Zeroness) -> ClaimStatus {
    match (premise, conclusion) {
        (Zeroness::Nonzero, _) => ClaimStatus::Confirmed,
        (Zeroness::Zero, Zeroness::Zero) => ClaimStatus::Confirmed,
        (Zeroness::Zero, Zeroness::Nonzero) => ClaimStatus::Violated,
        _ => ClaimStatus::Inconclusive,
    }
}

fn equivalence(condition: bool, all_theta: Zeroness) -> ClaimStatus {
    match all_theta {
        Zeroness::Straddle => ClaimStatus::Inconclusive,
        z if (z == Zeroness::Zero) == condition => ClaimStatus::Confirmed,
        _ => ClaimStatus::Violated,
    }
}

/// JSON-friendly model: complex entries as `[re, im]`, matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    pub channels: Vec<ChannelRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRecord {
    pub rate: f64,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.rows().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

impl ModelRecord {
    pub fn from_model(model: &LindbladModel) -> Self {
        Self {
            hamiltonian: matrix_to_rows(model.hamiltonian()),
            channels: model
                .channels()
                .iter()
                .map(|ch| ChannelRecord {
                    rate: ch.rate,
                    matrix: matrix_to_rows(&ch.operator),
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<LindbladModel> {
        let h = HermitianMatrix::new(rows_to_matrix(&self.hamiltonian)?)?;
        let channels = self
            .channels
            .iter()
            .map(|ch| JumpChannel::new(ch.rate, rows_to_matrix(&ch.matrix)?))
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(h, channels)
    }
}

/// Closed-form quantities for the eigenstate `|k0>` of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenstateEvaluation {
    pub k0: usize,
    /// Spectrum of `H`.
    pub energies: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_transposed: Vec<f64>,
    /// `sum_j gamma_j sum_i |L_j^{i k0}|^2 (w_i - w_k0)`
    pub power: f64,
    /// `sum_j gamma_j Tr(D_j[|k0><k0|] H)`
    pub power_trace: f64,
    /// `Tr(L[|k0><k0|] H)` with the full generator, unitary part included.
    pub energy_rate: f64,
    pub scale: f64,
    pub zero_tolerance: f64,
    pub vanishing: VanishingCheck,
}

pub fn evaluate_eigenstate(model: &LindbladModel, k0: usize, tol: &ToleranceConfig) -> Result<EigenstateEvaluation> {
    let d = model.dim();
    if k0 >= d {
        return Err(Error::Scenario(format!("k0 = {k0} out of range for dimension {d}")));
    }
    let scale = model.scale();
    let eig = Eigenstate::of(model.hamiltonian(), k0)?;
    let v = eig.spectrum.eigenvector(k0);
    let hv = model.hamiltonian().apply(&v);
    let w0 = eig.energies()[k0];
    let residual = hv.iter().zip(&v).map(|(a, b)| (a - b * w0).norm()).fold(0.0, f64::max);
    if residual > 1e-10 * scale {
        return Err(Error::Scenario(format!(
            "state {k0} is not an eigenvector of H (residual {residual:e})"
        )));
    }

    let w = eig.energies();
    let mut theta = Vec::with_capacity(model.channels().len());
    let mut theta_transposed = Vec::with_capacity(model.channels().len());
    for ch in model.channels() {
        let l = eig.components(&ch.operator);
        theta.push(theta_eigenstate(k0, w, &l)?);
        theta_transposed.push(theta_eigenstate_transposed(k0, w, &l)?);
    }
    let forms = power_eigenstate_forms(&eig, model)?;
    if (forms.index_form - forms.trace_form).abs() > tol.consistency * forms.index_form.abs().max(1.0) {
        return Err(Error::Consistency {
            what: "trace-form and index-form eigenstate power disagree".into(),
            lhs: forms.trace_form,
            rhs: forms.index_form,
        });
    }
    let energy_rate = liouvillian(model, &eig.state)?
        .trace_product(model.hamiltonian())
        .re;
    // beta does not enter the vanishing condition
    let ctx = BatteryContext::with_tolerance(1.0, model.clone(), *tol)?;
    let vanishing = vanishing_condition(&ctx, k0)?;

    Ok(EigenstateEvaluation {
        k0,
        energies: w.to_vec(),
        theta,
        theta_transposed,
        power: forms.index_form,
        power_trace: forms.trace_form,
        energy_rate,
        scale,
        zero_tolerance: tol.claim_zero * scale,
        vanishing,
    })
}

impl EigenstateEvaluation {
    pub fn claims(&self) -> Vec<ClaimVerdict> {
        let tol = self.zero_tolerance;
        let power = classify(self.power, tol);
        let condition = self.vanishing.holds;
        let mut out = vec![ClaimVerdict {
            claim: ClaimId::H,
            index_order: None,
            status: match power {
                Zeroness::Zero => ClaimStatus::Confirmed,
                Zeroness::Nonzero => ClaimStatus::Violated,
                Zeroness::Straddle => ClaimStatus::Inconclusive,
            },
            witness: Witness {
                theta: self.theta.clone(),
                power: self.power,
                condition: None,
            },
        }];
        for (order, theta) in [
            (IndexOrder::Row, &self.theta),
            (IndexOrder::Column, &self.theta_transposed),
        ] {
            let thetas = all_zero(theta, tol);
            let witness = Witness {
                theta: theta.clone(),
                power: self.power,
                condition: None,
            };
            out.push(ClaimVerdict {
                claim: ClaimId::C1,
                index_order: Some(order),
                status: implication(thetas, power),
                witness: witness.clone(),
            });
            out.push(ClaimVerdict {
                claim: ClaimId::C2,
                index_order: Some(order),
                status: implication(power, thetas),
                witness: witness.clone(),
            });
            out.push(ClaimVerdict {
                claim: ClaimId::C3,
                index_order: Some(order),
                status: equivalence(condition, thetas),
                witness: Witness {
                    condition: Some(condition),
                    ..witness
                },
            });
        }
        out
    }

    pub fn verdict(&self) -> ScenarioVerdict {
        let tol = self.zero_tolerance;
        match (all_zero(&self.theta, tol), classify(self.power, tol)) {
            (Zeroness::Nonzero, Zeroness::Nonzero) => ScenarioVerdict::HypothesisRefuted,
            (Zeroness::Zero, Zeroness::Zero) => ScenarioVerdict::Consistent,
            (Zeroness::Nonzero, Zeroness::Zero) => ScenarioVerdict::ThetaWithoutPower,
            (Zeroness::Zero, Zeroness::Nonzero) => ScenarioVerdict::PowerWithoutTheta,
            _ => ScenarioVerdict::Inconclusive,
        }
    }
}

/// One eigenstate scenario.
#[derive(Clone, Debug)]
pub struct ScenarioSpec {
    pub name: String,
    pub model: LindbladModel,
    pub beta: f64,
    pub k0: usize,
    /// Strictly descending, each in `(0, 1)`.
    pub epsilons: Vec<f64>,
    pub step: f64,
    pub horizon: f64,
    pub seed: u64,
    pub tol: ToleranceConfig,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, model: LindbladModel, k0: usize) -> Self {
        Self {
            name: name.into(),
            model,
            beta: 1.0,
            k0,
            epsilons: default_epsilons(),
            step: 1e-3,
            horizon: 1.0,
            seed: 0,
            tol: ToleranceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Scenario(format!("beta must be positive, got {}", self.beta)));
        }
        if self.k0 >= self.model.dim() {
            return Err(Error::Scenario(format!(
                "k0 = {} out of range for dimension {}",
                self.k0,
                self.model.dim()
            )));
        }
        if let Some(bad) = self.epsilons.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Scenario(format!("epsilon {bad} outside (0, 1)")));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Scenario("epsilons must be strictly descending".into()));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Scenario(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.step) {
            return Err(Error::Scenario(format!(
                "horizon {} must be at least one step {}",
                self.horizon, self.step
            )));
        }
        Ok(())
    }
}

/// `1e-2, 1e-3, ..., 1e-8`
pub fn default_epsilons() -> Vec<f64> {
    (2..=8).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub scenario: String,
    pub dim: usize,
    pub k0: usize,
    pub beta: f64,
    pub energies: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub theta_transposed: Vec<f64>,
    /// Index-form (closed-form) eigenstate power.
    pub power: f64,
    pub power_trace: f64,
    pub numeric_energy_rate: f64,
    pub zero_tolerance: f64,
    pub verdict: ScenarioVerdict,
    pub vanishing: VanishingCheck,
    pub claim_verdicts: Vec<ClaimVerdict>,
    pub epsilon_sweep: Option<EpsilonSweep>,
}

pub fn eigenstate_audit(spec: &ScenarioSpec) -> Result<AuditReport> {
    spec.validate()?;
    let eval = evaluate_eigenstate(&spec.model, spec.k0, &spec.tol)?;
    let sweep = if spec.epsilons.is_empty() {
        None
    } else {
        Some(epsilon_sweep(spec)?)
    };
    Ok(AuditReport {
        scenario: spec.name.clone(),
        dim: spec.model.dim(),
        k0: spec.k0,
        beta: spec.beta,
        energies: eval.energies.clone(),
        theta_values: eval.theta.clone(),
        theta_transposed: eval.theta_transposed.clone(),
        power: eval.power,
        power_trace: eval.power_trace,
        numeric_energy_rate: eval.energy_rate,
        zero_tolerance: eval.zero_tolerance,
        verdict: eval.verdict(),
        claim_verdicts: eval.claims(),
        vanishing: eval.vanishing,
        epsilon_sweep: sweep,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    /// `Tr(L[rho_eps] F)` with `F` built from `rho_eps`.
    pub power: Option<f64>,
    /// `Tr(L[rho_eps] H)`
    pub energy_rate: Option<f64>,
    /// `-Tr(L[rho_eps] ln rho_eps)`
    pub entropy_rate: Option<f64>,
    /// Trace defect after one propagation step from `rho_eps`.
    pub step_trace_defect: Option<f64>,
    pub step_min_eigenvalue: Option<f64>,
    pub error: Option<String>,
}

/// Least-squares fit `y = intercept + slope * ln(epsilon)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub rows: Vec<EpsilonRow>,
    /// Closed-form eigenstate power that `energy_rate` should approach.
    pub limit_power: f64,
    /// `max |energy_rate - limit_power| / epsilon` over the rows.
    pub convergence_constant: Option<f64>,
    pub entropy_fit: Option<LogFit>,
}

fn sweep_row(spec: &ScenarioSpec, ctx: &BatteryContext, eig: &Eigenstate, eps: f64) -> EpsilonRow {
    let mut row = EpsilonRow {
        epsilon: eps,
        power: None,
        energy_rate: None,
        entropy_rate: None,
        step_trace_defect: None,
        step_min_eigenvalue: None,
        error: None,
    };
    let mut run = || -> Result<()> {
        let rho = regularize(&eig.state, eps)?;
        let rate = liouvillian(&spec.model, &rho)?;
        row.energy_rate = Some(rate.trace_product(spec.model.hamiltonian()).re);
        let log_rho = rho.spectrum().log(0.0)?;
        row.entropy_rate = Some(-rate.trace_product(&log_rho).re);
        let decomp = free_energy_operator(&rho, ctx)?;
        row.power = Some(power_with(&rho, ctx, &decomp)?);
        let traj = propagate_with(&spec.model, &rho, &[0.0, spec.step], &spec.tol)?;
        let last = traj.diagnostics[1];
        row.step_trace_defect = Some(last.trace_defect);
        row.step_min_eigenvalue = Some(last.min_eigenvalue);
        Ok(())
    };
    if let Err(e) = run() {
        row.error = Some(e.to_string());
    }
    row
}

pub fn fit_log(points: &[(f64, f64)]) -> Option<LogFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(e, _)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, &(_, y))| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(LogFit {
        intercept: my - slope * mx,
        slope,
    })
}

/// Mixes `|k0><k0|` with `I/d` at each epsilon and records the dissipative
/// energy current, the entropy production rate and the charging power.
/// Row failures are reported in the row and do not stop the sweep.
pub fn epsilon_sweep(spec: &ScenarioSpec) -> Result<EpsilonSweep> {
    spec.validate()?;
    if spec.epsilons.is_empty() {
        return Err(Error::Scenario("epsilon list is empty".into()));
    }
    let ctx = BatteryContext::with_tolerance(spec.beta, spec.model.clone(), spec.tol)?;
    let eig = Eigenstate::of(spec.model.hamiltonian(), spec.k0)?;
    let limit_power = power_eigenstate_forms(&eig, &spec.model)?.index_form;

    let rows: Vec<EpsilonRow> = spec
        .epsilons
        .par_iter()
        .map(|&eps| sweep_row(spec, &ctx, &eig, eps))
        .collect();

    let convergence_constant = rows
        .iter()
        .filter_map(|r| r.energy_rate.map(|e| (e - limit_power).abs() / r.epsilon))
        .reduce(f64::max);
    let entropy_points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.entropy_rate.map(|s| (r.epsilon, s)))
        .collect();
    Ok(EpsilonSweep {
        entropy_fit: fit_log(&entropy_points),
        rows,
        limit_power,
        convergence_constant,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelEnsemble {
    /// Complex Ginibre jump operators.
    Ginibre,
    /// Jump operators diagonal in the eigenbasis of `H`.
    Diagonal,
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    pub seed: u64,
    pub min_dim: usize,
    pub max_dim: usize,
    pub trials: usize,
    pub channels: ChannelEnsemble,
    pub include_bundled: bool,
    /// Extra fixed scenarios evaluated after the bundled ones.
    pub extra: Vec<ScenarioSpec>,
    pub tol: ToleranceConfig,
}

impl Ensemble {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            min_dim: 2,
            max_dim: 6,
            trials,
            channels: ChannelEnsemble::Ginibre,
            include_bundled: true,
            extra: Vec::new(),
            tol: ToleranceConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub source: String,
    pub dim: usize,
    pub k0: usize,
    pub theta: Vec<f64>,
    pub theta_transposed: Vec<f64>,
    pub power: f64,
    pub condition: bool,
    pub verdict: ScenarioVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub claim: ClaimId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_order: Option<IndexOrder>,
    pub status: ClaimStatus,
    pub source: String,
    pub k0: usize,
    pub model: ModelRecord,
    pub theta: Vec<f64>,
    pub theta_transposed: Vec<f64>,
    pub power: f64,
    pub condition: bool,
}

impl Counterexample {
    /// Rebuilds the model from its serialized form and evaluates it again.
    pub fn reevaluate(&self, tol: &ToleranceConfig) -> Result<EigenstateEvaluation> {
        evaluate_eigenstate(&self.model.to_model()?, self.k0, tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub claim: ClaimId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_order: Option<IndexOrder>,
    pub description: String,
    pub status: ClaimStatus,
    pub confirmed: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifierReport {
    pub seed: u64,
    pub trials: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub channel_ensemble: ChannelEnsemble,
    pub include_bundled: bool,
    pub claims: Vec<ClaimSummary>,
    /// Every violated or inconclusive evaluation, with the full model.
    pub counterexamples: Vec<Counterexample>,
    pub outcomes: Vec<TrialOutcome>,
}

fn random_model(rng: &mut Rng, ens: &Ensemble) -> (LindbladModel, usize) {
    let d = rng.random_range(ens.min_dim..=ens.max_dim);
    let h = random_hermitian(rng, d, 1.0);
    let n_channels = rng.random_range(1..=3);
    let basis = match ens.channels {
        ChannelEnsemble::Diagonal => Some(h.eig().expect("Jacobi converges on random input").eigenvectors),
        ChannelEnsemble::Ginibre => None,
    };
    let channels = (0..n_channels)
        .map(|_| {
            let rate = unit_rate(rng);
            let op = match &basis {
                None => ginibre(rng, d),
                Some(u) => {
                    let diag = ComplexMatrix::from_fn(d, |i, j| if i == j { complex_normal(rng) } else { C64::new(0.0, 0.0) });
                    &(u * &diag) * &u.adjoint()
                }
            };
            JumpChannel::new(rate, op).expect("rate in (0, 1]")
        })
        .collect();
    let k0 = rng.random_range(0..d);
    (LindbladModel::new(h, channels).expect("consistent random model"), k0)
}

/// Evaluates claims `H` and `C1`-`C3` on a seeded random ensemble plus any
/// fixed scenarios. Each trial draws from its own ChaCha stream, so the
/// report depends only on the seed and configuration.
pub fn claim_falsifier(ens: &Ensemble) -> Result<FalsifierReport> {
    if ens.trials == 0 && !ens.include_bundled && ens.extra.is_empty() {
        return Err(Error::Parameter("claim falsifier needs at least one trial".into()));
    }
    if ens.min_dim < 2 || ens.max_dim < ens.min_dim {
        return Err(Error::Parameter(format!(
            "dimension range [{}, {}] must satisfy 2 <= min <= max",
            ens.min_dim, ens.max_dim
        )));
    }

    let mut cases: Vec<(String, LindbladModel, usize)> = Vec::new();
    if ens.include_bundled {
        cases.extend(bundled_scenarios().into_iter().map(|s| (s.name, s.model, s.k0)));
    }
    cases.extend(ens.extra.iter().map(|s| (s.name.clone(), s.model.clone(), s.k0)));
    let random: Vec<(String, LindbladModel, usize)> = (0..ens.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = Rng::seed_from_u64(ens.seed);
            rng.set_stream(trial as u64);
            let (model, k0) = random_model(&mut rng, ens);
            (format!("trial-{trial}"), model, k0)
        })
        .collect();
    cases.extend(random);

    let evaluated: Vec<(String, LindbladModel, EigenstateEvaluation)> = cases
        .into_par_iter()
        .map(|(source, model, k0)| {
            let eval = evaluate_eigenstate(&model, k0, &ens.tol)?;
            Ok((source, model, eval))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summaries: Vec<ClaimSummary> = Vec::new();
    let mut counterexamples = Vec::new();
    let mut outcomes = Vec::with_capacity(evaluated.len());
    for (source, model, eval) in &evaluated {
        for verdict in eval.claims() {
            let summary = match summaries
                .iter_mut()
                .find(|s| s.claim == verdict.claim && s.index_order == verdict.index_order)
            {
                Some(s) => s,
                None => {
                    summaries.push(ClaimSummary {
                        claim: verdict.claim,
                        index_order: verdict.index_order,
                        description: verdict.claim.description().to_string(),
                        status: ClaimStatus::Confirmed,
                        confirmed: 0,
                        violated: 0,
                        inconclusive: 0,
                    });
                    summaries.last_mut().expect("just pushed")
                }
            };
            match verdict.status {
                ClaimStatus::Confirmed => summary.confirmed += 1,
                ClaimStatus::Violated => summary.violated += 1,
                ClaimStatus::Inconclusive => summary.inconclusive += 1,
            }
            if verdict.status != ClaimStatus::Confirmed {
                counterexamples.push(Counterexample {
                    claim: verdict.claim,
                    index_order: verdict.index_order,
                    status: verdict.status,
                    source: source.clone(),
                    k0: eval.k0,
                    model: ModelRecord::from_model(model),
                    theta: eval.theta.clone(),
                    theta_transposed: eval.theta_transposed.clone(),
                    power: eval.power,
                    condition: eval.vanishing.holds,
                });
            }
        }
        outcomes.push(TrialOutcome {
            source: source.clone(),
            dim: model.dim(),
            k0: eval.k0,
            theta: eval.theta.clone(),
            theta_transposed: eval.theta_transposed.clone(),
            power: eval.power,
            condition: eval.vanishing.holds,
            verdict: eval.verdict(),
        });
    }
    for s in &mut summaries {
        s.status = if s.violated > 0 {
            ClaimStatus::Violated
        } else if s.inconclusive > 0 {
            ClaimStatus::Inconclusive
        } else {
            ClaimStatus::Confirmed
        };
    }

    Ok(FalsifierReport {
        seed: ens.seed,
        trials: ens.trials,
        min_dim: ens.min_dim,
        max_dim: ens.max_dim,
        channel_ensemble: ens.channels,
        include_bundled: ens.include_bundled,
        claims: summaries,
        counterexamples,
        outcomes,
    })
}

fn qubit_model(channels: Vec<(f64, ComplexMatrix)>) -> LindbladModel {
    LindbladModel::new(
        HermitianMatrix::from_real_diag(&[0.0, 1.0]),
        channels
            .into_iter()
            .map(|(g, l)| JumpChannel::new(g, l).expect("nonnegative rate"))
            .collect(),
    )
    .expect("qubit model")
}

/// Reference scenarios, all with `k0` the ground state unless noted.
///
/// - `qubit_sigma_x`: `H = diag(0, 1)`, `L = sigma_x`; Theta and P both equal 1.
/// - `qubit_dark_state`: `L = sigma_-`; Theta = 1 but `|0>` is dark, P = 0.
/// - `qubit_sigma_plus`: `L = sigma_+` pumping; Theta = 0 while P = 1.
/// - `qutrit_ladder`: `H = diag(0, 1, 2)`, raising at rate 1 and lowering at
///   rate 1/2, `k0 = 1`.
/// - `thermal_stationarity`: qubit with detailed-balance decay and excitation at `beta = 1`.
pub fn bundled_scenarios() -> Vec<ScenarioSpec> {
    use crate::matrix::qubit::{sigma_minus, sigma_plus, sigma_x};
    let a = crate::matrix::lowering(3);
    let ladder = LindbladModel::new(
        HermitianMatrix::from_real_diag(&[0.0, 1.0, 2.0]),
        vec![
            JumpChannel::new(1.0, a.adjoint()).expect("rate"),
            JumpChannel::new(0.5, a).expect("rate"),
        ],
    )
    .expect("qutrit model");
    vec![
        ScenarioSpec::new("qubit_sigma_x", qubit_model(vec![(1.0, sigma_x())]), 0),
        ScenarioSpec::new("qubit_dark_state", qubit_model(vec![(1.0, sigma_minus())]), 0),
        ScenarioSpec::new("qubit_sigma_plus", qubit_model(vec![(1.0, sigma_plus())]), 0),
        ScenarioSpec::new("qutrit_ladder", ladder, 1),
        ScenarioSpec::new(
            "thermal_stationarity",
            qubit_model(vec![(1.0, sigma_minus()), ((-1.0f64).exp(), sigma_plus())]),
            0,
        ),
    ]
}

pub fn bundled_scenario(name: &str) -> Option<ScenarioSpec> {
    bundled_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(report: &AuditReport, claim: ClaimId, order: Option<IndexOrder>) -> ClaimStatus {
        report
            .claim_verdicts
            .iter()
            .find(|v| v.claim == claim && v.index_order == order)
            .unwrap()
            .status
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify(0.0, 1e-10), Zeroness::Zero);
        assert_eq!(classify(-1e-10, 1e-10), Zeroness::Zero);
        assert_eq!(classify(5e-10, 1e-10), Zeroness::Straddle);
        assert_eq!(classify(1e-9, 1e-10), Zeroness::Nonzero);
        assert_eq!(implication(Zeroness::Straddle, Zeroness::Nonzero), ClaimStatus::Inconclusive);
        assert_eq!(implication(Zeroness::Zero, Zeroness::Straddle), ClaimStatus::Inconclusive);
        assert_eq!(implication(Zeroness::Nonzero, Zeroness::Straddle), ClaimStatus::Confirmed);
    }

    #[test]
    fn sigma_x_refutes_hypothesis() {
        let report = eigenstate_audit(&bundled_scenario("qubit_sigma_x").unwrap()).unwrap();
        assert_eq!(report.theta_values, vec![1.0]);
        assert_eq!(report.power, 1.0);
        assert_eq!(report.power_trace, 1.0);
        assert_eq!(report.numeric_energy_rate, 1.0);
        assert_eq!(report.verdict, ScenarioVerdict::HypothesisRefuted);
        assert_eq!(status(&report, ClaimId::H, None), ClaimStatus::Violated);
    }

    #[test]
    fn dark_state_violates_c2() {
        let report = eigenstate_audit(&bundled_scenario("qubit_dark_state").unwrap()).unwrap();
        assert_eq!(report.theta_values, vec![1.0]);
        assert_eq!(report.power, 0.0);
        assert_eq!(report.verdict, ScenarioVerdict::ThetaWithoutPower);
        assert_eq!(status(&report, ClaimId::C2, Some(IndexOrder::Row)), ClaimStatus::Violated);
        // The transposed order gives Theta = 0 here, consistent with P = 0.
        assert_eq!(report.theta_transposed, vec![0.0]);
        assert_eq!(status(&report, ClaimId::C2, Some(IndexOrder::Column)), ClaimStatus::Confirmed);
    }

    #[test]
    fn sigma_plus_has_power_without_theta() {
        let report = eigenstate_audit(&bundled_scenario("qubit_sigma_plus").unwrap()).unwrap();
        assert_eq!(report.theta_values, vec![0.0]);
        assert_eq!(report.power, 1.0);
        assert_eq!(report.verdict, ScenarioVerdict::PowerWithoutTheta);
        assert_eq!(status(&report, ClaimId::C1, Some(IndexOrder::Row)), ClaimStatus::Violated);
    }

    #[test]
    fn qutrit_ladder_values() {
        let report = eigenstate_audit(&bundled_scenario("qutrit_ladder").unwrap()).unwrap();
        // raising: row 1 holds <1|a^dag|0> = 1 -> (0 - 1)^2; lowering: <1|a|2> = sqrt 2 -> 2 (2 - 1)^2
        assert!((report.theta_values[0] - 1.0).abs() < 1e-14);
        assert!((report.theta_values[1] - 2.0).abs() < 1e-14);
        // P = 1 * 2 * (2 - 1) + 0.5 * 1 * (0 - 1)
        assert!((report.power - 1.5).abs() < 1e-14);
        assert!((report.power_trace - 1.5).abs() < 1e-14);
    }

    #[test]
    fn diagonal_channels_are_consistent() {
        let model = qubit_model(vec![
            (1.0, ComplexMatrix::diag_real(&[0.5, -0.5])),
            (0.3, ComplexMatrix::diag_real(&[2.0, 1.0])),
        ]);
        let mut spec = ScenarioSpec::new("diag", model, 0);
        spec.epsilons.clear();
        let report = eigenstate_audit(&spec).unwrap();
        assert_eq!(report.verdict, ScenarioVerdict::Consistent);
        assert!(report.epsilon_sweep.is_none());
        assert!(report.claim_verdicts.iter().all(|v| v.status == ClaimStatus::Confirmed));
    }

    #[test]
    fn scenario_validation() {
        let mut spec = bundled_scenario("qubit_sigma_x").unwrap();
        spec.k0 = 2;
        assert!(matches!(eigenstate_audit(&spec), Err(Error::Scenario(_))));
        let mut spec = bundled_scenario("qubit_sigma_x").unwrap();
        spec.epsilons = vec![1e-3, 1e-2];
        assert!(matches!(spec.validate(), Err(Error::Scenario(_))));
        spec.epsilons = vec![1.5];
        assert!(spec.validate().is_err());
        let mut spec = bundled_scenario("qubit_sigma_x").unwrap();
        spec.horizon = spec.step / 2.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_on_unitary_model() {
        let model = LindbladModel::unitary(HermitianMatrix::from_real_diag(&[0.0, 1.0, 2.5])).unwrap();
        let sweep = epsilon_sweep(&ScenarioSpec::new("unitary", model, 1)).unwrap();
        for row in &sweep.rows {
            assert!(row.error.is_none());
            assert!(row.entropy_rate.unwrap().abs() <= 1e-9);
            assert!(row.energy_rate.unwrap().abs() <= 1e-12);
        }
        assert!(sweep.entropy_fit.unwrap().slope.abs() <= 1e-9);
    }

    #[test]
    fn sweep_on_pumped_qubit() {
        let sweep = epsilon_sweep(&bundled_scenario("qubit_sigma_plus").unwrap()).unwrap();
        assert_eq!(sweep.limit_power, 1.0);
        for row in &sweep.rows {
            // energy_rate = 1 - eps / 2 exactly for this model
            let e = row.energy_rate.unwrap();
            assert!((e - 1.0).abs() <= 5.0 * row.epsilon);
            assert!(row.error.is_none(), "{:?}", row.error);
        }
        let c = sweep.convergence_constant.unwrap();
        assert!((c - 0.5).abs() < 1e-6, "C = {c}");
        // entropy rate ~ -ln(eps / 2): slope near -1
        let fit = sweep.entropy_fit.unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-2, "{fit:?}");
    }

    #[test]
    fn sweep_row_errors_do_not_abort() {
        let model = qubit_model(vec![(1e4, crate::matrix::qubit::sigma_x())]);
        let mut spec = ScenarioSpec::new("stiff", model, 0);
        spec.step = 1.0;
        let sweep = epsilon_sweep(&spec).unwrap();
        assert_eq!(sweep.rows.len(), spec.epsilons.len());
        assert!(sweep.rows.iter().all(|r| r.error.is_some() && r.energy_rate.is_some()));
    }

    #[test]
    fn log_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-4, 1e-6].iter().map(|&e: &f64| (e, 3.0 - 2.0 * e.ln())).collect();
        let fit = fit_log(&pts).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit_log(&pts[..1]).is_none());
    }

    #[test]
    fn falsifier_is_deterministic_and_records_witnesses() {
        let ens = Ensemble::new(7, 20);
        let a = claim_falsifier(&ens).unwrap();
        let b = claim_falsifier(&ens).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcomes.len(), 20 + bundled_scenarios().len());
        let dark = a
            .counterexamples
            .iter()
            .find(|c| c.source == "qubit_dark_state" && c.claim == ClaimId::C2 && c.index_order == Some(IndexOrder::Row))
            .expect("dark-state witness");
        assert_eq!(dark.theta, vec![1.0]);
        assert_eq!(dark.power, 0.0);
        let again = dark.reevaluate(&ens.tol).unwrap();
        assert_eq!(again.theta, dark.theta);
        assert_eq!(again.power, dark.power);
    }

    #[test]
    fn diagonal_ensemble_confirms_c1() {
        let ens = Ensemble {
            channels: ChannelEnsemble::Diagonal,
            include_bundled: false,
            ..Ensemble::new(3, 30)
        };
        let report = claim_falsifier(&ens).unwrap();
        for c in report.claims.iter().filter(|c| c.claim == ClaimId::C1) {
            assert_eq!(c.status, ClaimStatus::Confirmed);
            assert_eq!(c.confirmed, 30);
        }
    }

    #[test]
    fn model_record_roundtrip() {
        let model = bundled_scenario("qutrit_ladder").unwrap().model;
        let rec = ModelRecord::from_model(&model);
        assert_eq!(rec.to_model().unwrap(), model);
    }
}
