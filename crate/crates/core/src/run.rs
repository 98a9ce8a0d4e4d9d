//! Executes a validated scenario for one command and collects the rows and
//! summary to emit.

use crate::dynamics::{basins_from, find_fixed_points, Basin, Economy, FixedPoint};
use crate::levels::{compare_sse, EconomyState, LevelsError, SseComparison, SteadyState};
use crate::numeric::linspace;
use crate::policy::{
    continuation_rate, lambda_at, min_constant_tax, simulate_policy, synthesize_schedule, tau_hat, unstable_threshold,
    PeriodRecord, PolicyError, TaxSchedule, Threshold,
};
use crate::scenario::{GammaParams, LambdaParams, MuParams, PolicyParams, ScenarioDoc, SeedState, SweepParameter};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    FixedPoints,
    SteadyState,
    Policy,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::FixedPoints => "fixed-points",
            Command::SteadyState => "steady-state",
            Command::Policy => "policy",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("{}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("policy infeasible: {0}")]
    Infeasible(PolicyError),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Infeasible(_) => 3,
            RunError::Solver(_) => 4,
        }
    }
}

impl From<LevelsError> for RunError {
    fn from(e: LevelsError) -> Self {
        match e {
            LevelsError::ElasticityViolated { .. } => RunError::Validation(vec![e.to_string()]),
            LevelsError::SolverFailure { .. } => RunError::Solver(e.to_string()),
        }
    }
}

impl From<PolicyError> for RunError {
    fn from(e: PolicyError) -> Self {
        RunError::Infeasible(e)
    }
}

/// Thresholds reported by the `policy` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyAnalysis {
    pub j0: f64,
    pub margin: f64,
    /// Norm multiplier in force at t = 0.
    pub lambda_0: f64,
    /// Rate making the least green-leaning household indifferent at t = 0.
    pub tau_hat_full: f64,
    /// Rate continuing after the economy is in the green basin.
    pub continuation_rate: f64,
    pub barrier: Threshold,
    /// Rate making the barrier household indifferent at t = 0.
    pub tau_hat_barrier: Option<f64>,
    pub min_constant_tax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub threshold: Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: &'static str,
    pub tau: f64,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub command: Command,
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<Vec<FixedPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basins: Option<Vec<Basin>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Threshold>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_states: Option<SseComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<TaxSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_to: Option<FixedPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<SteadyState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_welfare: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl Summary {
    fn new(command: Command, tau: f64) -> Self {
        Self {
            command,
            tau,
            fixed_points: None,
            basins: None,
            threshold: None,
            steady_states: None,
            policy: None,
            schedule: None,
            converged_to: None,
            terminal: None,
            cumulative_welfare: None,
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub records: Vec<PeriodRecord>,
    pub summary: Summary,
}

pub fn run(command: Command, doc: &ScenarioDoc) -> Result<RunResult, RunError> {
    doc.validate().map_err(RunError::Validation)?;
    let economy = doc.economy().map_err(RunError::Validation)?;
    match command {
        Command::Simulate => simulate(doc, &economy),
        Command::FixedPoints => fixed_points(doc, &economy),
        Command::SteadyState => steady_state(doc, &economy),
        Command::Policy => policy(doc, &economy),
        Command::Sweep => sweep(doc),
    }
}

fn initial_state(doc: &ScenarioDoc, economy: &Economy) -> Result<EconomyState, RunError> {
    let init = &doc.initial;
    Ok(match init.seed {
        SeedState::Pristine => EconomyState::pristine(),
        SeedState::BrownSse => EconomyState::brown_sse(economy, init.tau_prev)?,
        SeedState::Explicit => EconomyState { b_prev: init.b_prev.unwrap_or(0.0), h_prev: init.h_prev.unwrap_or(0.0) },
    })
}

fn margin_of(doc: &ScenarioDoc) -> f64 {
    match doc.policy {
        PolicyParams::Synthesize { margin, .. } => margin,
        _ => 1e-6,
    }
}

fn schedule_of(doc: &ScenarioDoc, economy: &Economy) -> Result<TaxSchedule, RunError> {
    Ok(match &doc.policy {
        PolicyParams::Constant { tau } => TaxSchedule::constant(*tau),
        PolicyParams::Schedule { rates } => TaxSchedule::from_rates(rates.clone()),
        PolicyParams::Synthesize { margin, t_max } => {
            synthesize_schedule(economy, doc.initial.j0, *margin, t_max.unwrap_or(doc.horizon), &doc.policy_config())?
        }
    })
}

fn simulated(
    doc: &ScenarioDoc,
    economy: &Economy,
    schedule: &TaxSchedule,
    summary: &mut Summary,
) -> Result<Vec<PeriodRecord>, RunError> {
    let state = initial_state(doc, economy)?;
    let report = simulate_policy(economy, schedule, doc.initial.j0, state, doc.horizon, &doc.solver_config());
    summary.schedule = Some(report.schedule);
    summary.converged_to = report.trajectory.converged_to;
    summary.terminal = report.terminal;
    summary.cumulative_welfare = Some(report.cumulative_welfare);
    Ok(report.records)
}

fn simulate(doc: &ScenarioDoc, economy: &Economy) -> Result<RunResult, RunError> {
    let schedule = schedule_of(doc, economy)?;
    let mut summary = Summary::new(Command::Simulate, doc.tau);
    let records = simulated(doc, economy, &schedule, &mut summary)?;
    Ok(RunResult { records, summary })
}

fn fixed_points(doc: &ScenarioDoc, economy: &Economy) -> Result<RunResult, RunError> {
    let cfg = doc.solver_config();
    let fps = find_fixed_points(economy, doc.tau, &cfg);
    let mut summary = Summary::new(Command::FixedPoints, doc.tau);
    summary.basins = Some(basins_from(economy, doc.tau, &fps, &cfg));
    summary.threshold = Some(unstable_threshold(economy, doc.tau, &cfg));
    summary.fixed_points = Some(fps);
    Ok(RunResult { records: Vec::new(), summary })
}

fn steady_state(doc: &ScenarioDoc, economy: &Economy) -> Result<RunResult, RunError> {
    let mut summary = Summary::new(Command::SteadyState, doc.tau);
    summary.steady_states = Some(compare_sse(economy, doc.tau)?);
    Ok(RunResult { records: Vec::new(), summary })
}

fn policy(doc: &ScenarioDoc, economy: &Economy) -> Result<RunResult, RunError> {
    let j0 = doc.initial.j0;
    let margin = margin_of(doc);
    let pcfg = doc.policy_config();
    let lambda_0 = lambda_at(economy, j0, 0.0);
    let tail = continuation_rate(economy, margin);
    let barrier = unstable_threshold(economy, tail, &pcfg.solver);
    let tau_hat_barrier = match barrier {
        Threshold::Barrier(b) => Some(tau_hat(economy, b, lambda_0)),
        _ => None,
    };
    let min_tax = min_constant_tax(economy, j0, margin, &pcfg)?;
    let t_max = match doc.policy {
        PolicyParams::Synthesize { t_max: Some(t), .. } => t,
        _ => doc.horizon,
    };
    let schedule = synthesize_schedule(economy, j0, margin, t_max, &pcfg)?;

    let mut summary = Summary::new(Command::Policy, doc.tau);
    summary.policy = Some(PolicyAnalysis {
        j0,
        margin,
        lambda_0,
        tau_hat_full: tau_hat(economy, 1.0, lambda_0),
        continuation_rate: tail,
        barrier,
        tau_hat_barrier,
        min_constant_tax: min_tax,
    });
    let records = simulated(doc, economy, &schedule, &mut summary)?;
    Ok(RunResult { records, summary })
}

/// Copy of `doc` with the swept parameter set to `value`.
pub fn with_parameter(doc: &ScenarioDoc, parameter: SweepParameter, value: f64) -> ScenarioDoc {
    let mut d = doc.clone();
    let f = &mut d.forms;
    match parameter {
        SweepParameter::Tau => d.override_tau(value),
        SweepParameter::AG => d.economy.a_g = value,
        SweepParameter::AB => d.economy.a_b = value,
        SweepParameter::GammaMax => match &mut f.gamma {
            GammaParams::Affine { gamma_max, .. } | GammaParams::Power { gamma_max, .. } => *gamma_max = value,
        },
        SweepParameter::GammaMin => match &mut f.gamma {
            GammaParams::Affine { gamma_min, .. } | GammaParams::Power { gamma_min, .. } => *gamma_min = value,
        },
        SweepParameter::Lambda0 => match &mut f.lambda {
            LambdaParams::Saturating { lambda_0, .. } | LambdaParams::Exponential { lambda_0, .. } => *lambda_0 = value,
        },
        SweepParameter::LambdaInf => match &mut f.lambda {
            LambdaParams::Saturating { lambda_inf, .. } | LambdaParams::Exponential { lambda_inf, .. } => {
                *lambda_inf = value
            }
        },
        SweepParameter::DeltaB => match &mut f.mu {
            MuParams::Exponential { delta_b, .. } | MuParams::Rational { delta_b, .. } => *delta_b = value,
        },
        SweepParameter::DeltaH => match &mut f.mu {
            MuParams::Exponential { delta_h, .. } | MuParams::Rational { delta_h, .. } => *delta_h = value,
        },
    }
    d
}

fn sweep(doc: &ScenarioDoc) -> Result<RunResult, RunError> {
    let Some(grid) = doc.sweep.clone() else {
        return Err(RunError::Validation(vec!["the sweep command needs a [sweep] section".to_string()]));
    };
    let values: Vec<f64> =
        if grid.steps == 1 { vec![grid.from] } else { linspace(grid.from, grid.to, grid.steps).collect() };
    let cfg = doc.solver_config();
    // Grid points are independent; collect keeps them in grid order.
    let points = values
        .par_iter()
        .map(|&value| {
            let d = with_parameter(doc, grid.parameter, value);
            let (economy, tau) = match d.economy() {
                Ok(e) => (e, d.tau),
                Err(errs) => {
                    return Err(RunError::Validation(
                        errs.into_iter().map(|e| format!("{}={value}: {e}", grid.parameter.name())).collect(),
                    ))
                }
            };
            Ok(SweepPoint {
                value,
                fixed_points: find_fixed_points(&economy, tau, &cfg),
                threshold: unstable_threshold(&economy, tau, &cfg),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = Summary::new(Command::Sweep, doc.tau);
    summary.sweep = Some(Sweep { parameter: grid.parameter.name(), tau: doc.tau, points });
    Ok(RunResult { records: Vec::new(), summary })
}
