//! Scenario documents: one TOML file fully determines a run.
//!
//! ```toml
//! tau = 0.0
//! horizon = 50
//!
//! [economy]
//! a_g = 1.0
//! a_b = 1.0
//! ratio_convention = "share"
//!
//! [forms.gamma]
//! family = "affine"
//! gamma_max = 1.5
//! gamma_min = 0.5
//!
//! [forms.lambda]
//! family = "saturating"
//! lambda_0 = 0.5
//! lambda_inf = 2.5
//!
//! [forms.mu]
//! family = "exponential"
//! delta_b = 0.2
//! delta_h = 0.05
//!
//! [initial]
//! j0 = 0.0
//! seed = "brown-sse"
//!
//! [policy]
//! kind = "schedule"
//! rates = [0.45, 0.0]
//! ```
//!
//! Unknown keys are rejected. Syntax errors carry the line and column;
//! semantic checks are all run and reported together.

use crate::dynamics::{Economy, RatioConvention, SolverConfig};
use crate::forms::{
    DamageCurve, DamageShape, FunctionalForms, NormShape, PreferenceCurve, PreferenceShape, SocialNormCurve,
};
use crate::policy::PolicyConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario syntax error: {0}")]
    Syntax(String),
    #[error("invalid scenario:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    /// Tax rate for fixed-point, steady-state and sweep analyses.
    #[serde(default)]
    pub tau: f64,
    pub horizon: usize,
    pub economy: EconomyParams,
    pub forms: FormsParams,
    #[serde(default)]
    pub initial: InitialParams,
    #[serde(default)]
    pub policy: PolicyParams,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyParams {
    pub a_g: f64,
    pub a_b: f64,
    #[serde(default)]
    pub ratio_convention: RatioConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormsParams {
    pub gamma: GammaParams,
    pub lambda: LambdaParams,
    pub mu: MuParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaParams {
    Affine { gamma_max: f64, gamma_min: f64 },
    Power { gamma_max: f64, gamma_min: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LambdaParams {
    Saturating { lambda_0: f64, lambda_inf: f64 },
    Exponential { lambda_0: f64, lambda_inf: f64, rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MuParams {
    Exponential { delta_b: f64, delta_h: f64 },
    Rational { delta_b: f64, delta_h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedState {
    /// Brown steady state sustained under `tau_prev`.
    BrownSse,
    /// No prior brown output or healthcare (μ = 1).
    #[default]
    Pristine,
    /// Use `b_prev` and `h_prev` as given.
    Explicit,
}

impl fmt::Display for SeedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedState::BrownSse => "brown-sse",
            SeedState::Pristine => "pristine",
            SeedState::Explicit => "explicit",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialParams {
    #[serde(default)]
    pub j0: f64,
    #[serde(default)]
    pub seed: SeedState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_prev: Option<f64>,
    #[serde(default)]
    pub tau_prev: f64,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self { j0: 0.0, seed: SeedState::Pristine, b_prev: None, h_prev: None, tau_prev: 0.0 }
    }
}

fn default_margin() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicyParams {
    Constant {
        tau: f64,
    },
    Schedule {
        rates: Vec<f64>,
    },
    Synthesize {
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_max: Option<usize>,
    },
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams::Constant { tau: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    pub grid_points: usize,
    pub fixed_point_tol: f64,
    pub probe_eps: f64,
    pub convergence_tol: f64,
    pub convergence_streak: usize,
    pub max_iterations: usize,
    pub tax_cap: f64,
    pub bisection_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        let s = SolverConfig::default();
        let p = PolicyConfig::default();
        Self {
            grid_points: s.grid_points,
            fixed_point_tol: s.fixed_point_tol,
            probe_eps: s.probe_eps,
            convergence_tol: s.convergence_tol,
            convergence_streak: s.convergence_streak,
            max_iterations: s.max_iterations,
            tax_cap: p.tax_cap,
            bisection_tol: p.bisection_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Tau,
    AG,
    AB,
    GammaMax,
    GammaMin,
    Lambda0,
    LambdaInf,
    DeltaB,
    DeltaH,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Tau => "tau",
            SweepParameter::AG => "a_g",
            SweepParameter::AB => "a_b",
            SweepParameter::GammaMax => "gamma_max",
            SweepParameter::GammaMin => "gamma_min",
            SweepParameter::Lambda0 => "lambda_0",
            SweepParameter::LambdaInf => "lambda_inf",
            SweepParameter::DeltaB => "delta_b",
            SweepParameter::DeltaH => "delta_h",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ScenarioDoc {
    pub fn forms(&self) -> Result<FunctionalForms, Vec<String>> {
        let mut errors = Vec::new();
        let gamma = match self.forms.gamma {
            GammaParams::Affine { gamma_max, gamma_min } => PreferenceCurve::affine(gamma_max, gamma_min),
            GammaParams::Power { gamma_max, gamma_min, exponent } => {
                PreferenceCurve::new(gamma_max, gamma_min, PreferenceShape::Power { exponent })
            }
        }
        .map_err(|e| errors.push(e.to_string()))
        .ok();
        let lambda = match self.forms.lambda {
            LambdaParams::Saturating { lambda_0, lambda_inf } => SocialNormCurve::saturating(lambda_0, lambda_inf),
            LambdaParams::Exponential { lambda_0, lambda_inf, rate } => {
                SocialNormCurve::new(lambda_0, lambda_inf, NormShape::Exponential { rate })
            }
        }
        .map_err(|e| errors.push(e.to_string()))
        .ok();
        let mu = match self.forms.mu {
            MuParams::Exponential { delta_b, delta_h } => DamageCurve::new(delta_b, delta_h, DamageShape::Exponential),
            MuParams::Rational { delta_b, delta_h } => DamageCurve::new(delta_b, delta_h, DamageShape::Rational),
        }
        .map_err(|e| errors.push(e.to_string()))
        .ok();
        match (gamma, lambda, mu) {
            (Some(gamma), Some(lambda), Some(mu)) => Ok(FunctionalForms { gamma, lambda, mu }),
            _ => Err(errors),
        }
    }

    pub fn economy(&self) -> Result<Economy, Vec<String>> {
        let forms = self.forms();
        let mut errors = forms.as_ref().err().cloned().unwrap_or_default();
        let e = &self.economy;
        if !(e.a_g > 0.0 && e.a_b > 0.0 && e.a_g.is_finite() && e.a_b.is_finite()) {
            errors.push(format!("technology scales must be positive (a_g={}, a_b={})", e.a_g, e.a_b));
        }
        match forms {
            Ok(forms) if errors.is_empty() => {
                Economy::new(e.a_g, e.a_b, forms, e.ratio_convention).map_err(|err| vec![err.to_string()])
            }
            _ => Err(errors),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            grid_points: s.grid_points,
            fixed_point_tol: s.fixed_point_tol,
            probe_eps: s.probe_eps,
            convergence_tol: s.convergence_tol,
            convergence_streak: s.convergence_streak,
            max_iterations: s.max_iterations,
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            tax_cap: self.solver.tax_cap,
            bisection_tol: self.solver.bisection_tol,
            solver: self.solver_config(),
        }
    }

    /// Overrides the analysis tax and, for constant policies, the policy rate.
    pub fn override_tau(&mut self, tau: f64) {
        self.tau = tau;
        if let PolicyParams::Constant { tau: rate } = &mut self.policy {
            *rate = tau;
        }
    }

    /// Tax rates known before the run; elasticity is checked at each.
    fn known_rates(&self) -> Vec<f64> {
        let mut rates = vec![self.tau, self.initial.tau_prev];
        match &self.policy {
            PolicyParams::Constant { tau } => rates.push(*tau),
            PolicyParams::Schedule { rates: r } => rates.extend(r.iter().copied()),
            PolicyParams::Synthesize { .. } => {}
        }
        if let Some(sweep) = &self.sweep {
            if sweep.parameter == SweepParameter::Tau {
                rates.push(sweep.from);
                rates.push(sweep.to);
            }
        }
        rates
    }

    /// Runs every semantic check and returns all failures.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.horizon == 0 {
            errors.push("horizon must be at least 1".to_string());
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            errors.push(format!("tau must be a nonnegative rate (got {})", self.tau));
        }
        let init = &self.initial;
        if !(0.0..=1.0).contains(&init.j0) {
            errors.push(format!("initial j0 must lie in [0, 1] (got {})", init.j0));
        }
        if !(init.tau_prev >= 0.0) {
            errors.push(format!("initial tau_prev must be nonnegative (got {})", init.tau_prev));
        }
        match init.seed {
            SeedState::Explicit => match (init.b_prev, init.h_prev) {
                (Some(b), Some(h)) if b >= 0.0 && h >= 0.0 => {}
                (Some(_), Some(_)) => errors.push("initial b_prev and h_prev must be nonnegative".to_string()),
                _ => errors.push("seed \"explicit\" requires b_prev and h_prev".to_string()),
            },
            _ => {
                if init.b_prev.is_some() || init.h_prev.is_some() {
                    errors.push(format!(
                        "b_prev/h_prev are only used with seed \"explicit\" (seed is \"{}\")",
                        init.seed
                    ));
                }
            }
        }
        match &self.policy {
            PolicyParams::Constant { tau } if !(*tau >= 0.0) => {
                errors.push(format!("policy tau must be nonnegative (got {tau})"));
            }
            PolicyParams::Schedule { rates } => {
                if rates.is_empty() {
                    errors.push("policy schedule needs at least one rate".to_string());
                }
                if rates.iter().any(|r| !(*r >= 0.0)) {
                    errors.push("policy schedule rates must be nonnegative".to_string());
                }
            }
            PolicyParams::Synthesize { margin, t_max } => {
                if !(*margin > 0.0 && *margin < 1.0) {
                    errors.push(format!("policy margin must lie in (0, 1) (got {margin})"));
                }
                if *t_max == Some(0) {
                    errors.push("policy t_max must be at least 1".to_string());
                }
            }
            _ => {}
        }
        let s = &self.solver;
        if s.grid_points < 3 {
            errors.push("solver grid_points must be at least 3".to_string());
        }
        for (name, v) in [
            ("fixed_point_tol", s.fixed_point_tol),
            ("probe_eps", s.probe_eps),
            ("convergence_tol", s.convergence_tol),
            ("tax_cap", s.tax_cap),
            ("bisection_tol", s.bisection_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("solver {name} must be positive (got {v})"));
            }
        }
        if s.max_iterations == 0 || s.convergence_streak == 0 {
            errors.push("solver max_iterations and convergence_streak must be positive".to_string());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.steps == 0 {
                errors.push("sweep steps must be at least 1".to_string());
            }
            if !(sweep.from <= sweep.to) {
                errors.push(format!("sweep range must satisfy from <= to (got {}..{})", sweep.from, sweep.to));
            }
        }

        match self.economy() {
            Err(mut e) => errors.append(&mut e),
            Ok(economy) => {
                let mu = economy.forms().mu;
                let mut rates = self.known_rates();
                rates.retain(|r| *r >= 0.0 && r.is_finite());
                rates.sort_by(f64::total_cmp);
                rates.dedup();
                for tau in rates {
                    let report = mu.elasticity_check(tau, 0.0, economy.a_b());
                    if !report.holds {
                        errors.push(format!(
                            "assumption (elast) violated at tau={tau}: healthcare elasticity is not below |brown elasticity| at B={}",
                            report.violating_b.unwrap_or(report.worst_b)
                        ));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    let doc: ScenarioDoc =
        toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string().trim_end().to_string()))?;
    doc.validate().map_err(ScenarioError::Invalid)?;
    Ok(doc)
}

/// Canonical TOML rendering of a scenario; parses back to an equal document.
pub fn to_toml(doc: &ScenarioDoc) -> String {
    toml::to_string(doc).expect("scenario documents always serialize")
}

/// The reference scenario shipped with the crate.
pub const REF1: &str = include_str!("../scenarios/ref1.toml");
