use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use qbattery::audit::{
    claim_falsifier, eigenstate_audit, epsilon_sweep, AuditReport, Ensemble, EpsilonSweep, FalsifierReport,
    ScenarioSpec,
};
use qbattery::free_energy::power_with;
use qbattery::propagate::propagate_partial;
use qbattery::{
    free_energy_operator, mean_free_energy, power_fd, regularize, theta_operator_form, uniform_grid, BatteryContext,
    DensityMatrix, LindbladModel,
};

use crate::config::{Config, ConfigError, InitialState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Run,
    Audit,
    Sweep,
    Check,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] qbattery::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Numeric(_) => 3,
            CommandError::Io(_) => 1,
        }
    }
}

fn require_model(cfg: &Config) -> Result<&LindbladModel, ConfigError> {
    cfg.model.as_ref().ok_or_else(|| ConfigError {
        path: "hamiltonian".into(),
        message: "this command needs a model (dim, hamiltonian, channels)".into(),
    })
}

fn initial_density(cfg: &Config, model: &LindbladModel) -> Result<DensityMatrix, CommandError> {
    let state = cfg.initial_state.as_ref().ok_or_else(|| ConfigError {
        path: "initial_state".into(),
        message: "run needs an initial state".into(),
    })?;
    Ok(match state {
        InitialState::Eigenstate { k0, epsilon } => {
            let eig = qbattery::free_energy::Eigenstate::of(model.hamiltonian(), *k0)?;
            match epsilon {
                Some(e) => regularize(&eig.state, *e)?,
                None => eig.state,
            }
        }
        InitialState::Matrix(rho) => rho.clone(),
        InitialState::Thermal { beta } => DensityMatrix::thermal(model.hamiltonian(), *beta)?,
    })
}

/// `{:.16e}`: 17 significant digits, locale independent.
fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn csv_header(channels: usize) -> String {
    let mut cols: Vec<String> = ["t", "energy", "entropy", "free_energy", "power_analytic", "power_fd"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=channels).map(|j| format!("theta_{j}")));
    cols.push("trace_defect".into());
    cols.push("min_eig".into());
    cols.join(",")
}

/// Propagates the configured initial state and writes one CSV row per grid
/// point. `power_analytic` and `theta_j` are blank where the state is not
/// full rank; `power_fd` is blank at the endpoints. On a propagation failure
/// the rows computed so far are written before the error is returned.
pub fn run_command<W: Write>(cfg: &Config, out: &mut W) -> Result<(), CommandError> {
    let model = require_model(cfg)?;
    let rho0 = initial_density(cfg, model)?;
    let ctx = BatteryContext::with_tolerance(cfg.doc.beta, model.clone(), *cfg.tolerances())?;
    let t = cfg.doc.time;
    let grid = uniform_grid(t.t0, t.horizon, t.step)?;
    let (traj, failure) = propagate_partial(model, &rho0, &grid, cfg.tolerances());

    writeln!(out, "{}", csv_header(model.channels().len()))?;
    let full_len = grid.len();
    for (i, (time, rho)) in traj.times.iter().zip(&traj.states).enumerate() {
        let diag = traj.diagnostics[i];
        let decomp = free_energy_operator(rho, &ctx).ok();
        let power = decomp.as_ref().and_then(|d| power_with(rho, &ctx, d).ok());
        let fd = if i >= 1 && i + 1 < full_len && i + 1 < traj.len() {
            power_fd(&traj, &ctx, i).ok()
        } else {
            None
        };
        let mut fields = vec![
            fmt_num(*time),
            fmt_num(rho.expectation(model.hamiltonian())),
            fmt_num(rho.entropy()),
            fmt_num(mean_free_energy(rho, &ctx)),
            fmt_opt(power),
            fmt_opt(fd),
        ];
        for ch in model.channels() {
            let theta = decomp
                .as_ref()
                .and_then(|d| theta_operator_form(d, rho, &ch.operator).ok());
            fields.push(fmt_opt(theta));
        }
        fields.push(fmt_num(diag.trace_defect));
        fields.push(fmt_num(diag.min_eigenvalue));
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn scenario_spec(cfg: &Config) -> Result<ScenarioSpec, CommandError> {
    let model = require_model(cfg)?.clone();
    let k0 = cfg.eigenstate_index().ok_or_else(|| ConfigError {
        path: "initial_state".into(),
        message: "audit and sweep need an initial state of kind \"eigenstate\"".into(),
    })?;
    Ok(ScenarioSpec {
        name: cfg.name(),
        model,
        beta: cfg.doc.beta,
        k0,
        epsilons: cfg.doc.epsilons.clone(),
        step: cfg.doc.time.step,
        horizon: cfg.doc.time.horizon,
        seed: cfg.doc.seed,
        tol: *cfg.tolerances(),
    })
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ReportBody {
    Audit(Box<AuditReport>),
    Sweep(EpsilonSweep),
    Check(FalsifierReport),
}

#[derive(Debug, Serialize)]
pub struct ReportFile<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    pub seed: u64,
    /// Input document as read.
    pub input: &'a serde_json::Value,
    /// Validated configuration in canonical form, after command-line overrides.
    pub config: &'a crate::config::ConfigDoc,
    pub report: ReportBody,
}

pub fn audit_command(mode: Mode, cfg: &Config) -> Result<ReportBody, CommandError> {
    Ok(match mode {
        Mode::Audit => ReportBody::Audit(Box::new(eigenstate_audit(&scenario_spec(cfg)?)?)),
        Mode::Sweep => {
            if cfg.doc.epsilons.is_empty() {
                return Err(ConfigError {
                    path: "epsilons".into(),
                    message: "sweep needs at least one epsilon".into(),
                }
                .into());
            }
            ReportBody::Sweep(epsilon_sweep(&scenario_spec(cfg)?)?)
        }
        Mode::Check => {
            let mut extra = Vec::new();
            if cfg.model.is_some() {
                extra.push(scenario_spec(cfg)?);
            }
            let ens = Ensemble {
                seed: cfg.doc.seed,
                min_dim: cfg.doc.dim_range[0],
                max_dim: cfg.doc.dim_range[1],
                trials: cfg.doc.trials,
                channels: cfg.doc.channel_ensemble,
                include_bundled: cfg.doc.include_bundled,
                extra,
                tol: *cfg.tolerances(),
            };
            ReportBody::Check(claim_falsifier(&ens)?)
        }
        Mode::Run => unreachable!("run mode writes CSV"),
    })
}

/// Serializes a report file as pretty JSON with a trailing newline.
pub fn render_report(mode: Mode, input: &serde_json::Value, cfg: &Config, body: ReportBody) -> String {
    let file = ReportFile {
        tool: "qbattery",
        version: env!("CARGO_PKG_VERSION"),
        mode,
        seed: cfg.doc.seed,
        input,
        config: &cfg.doc,
        report: body,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn header_layout() {
        assert_eq!(
            csv_header(2),
            "t,energy,entropy,free_energy,power_analytic,power_fd,theta_1,theta_2,trace_defect,min_eig"
        );
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn run_requires_initial_state() {
        let cfg = parse_config(r#"{"dim": 2, "hamiltonian": [[0, 0], [0, 1]]}"#).unwrap();
        let err = run_command(&cfg, &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn propagation_failure_flushes_partial_csv() {
        let cfg = parse_config(
            r#"{"dim": 2, "hamiltonian": [[0, 0], [0, 1]],
                "channels": [{"rate": 50, "matrix": [[0, 1], [0, 0]]}],
                "initial_state": {"kind": "eigenstate", "k0": 1, "epsilon": 0.01},
                "time": {"horizon": 1, "step": 0.1}}"#,
        )
        .unwrap();
        let mut buf = Vec::new();
        let err = run_command(&cfg, &mut buf).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().count() >= 2, "{text}");
    }
}
