//! Quantities behind a given green share: the per-period equilibrium
//! (prices, wage, outputs, labor allocation, household demands), the two
//! steady states, and their consumption and welfare comparison.
//!
//! The brown good is the numéraire. Brown output is taken as
//! B = (1−j)·μ·a_b/(1+τ), the form consistent with labor clearing when tax
//! revenue buys healthcare at the brown technology scale.

use crate::dynamics::Economy;
use crate::numeric::{bisect, linspace};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevelsError {
    #[error("assumption (elast) violated at tau={tau}: healthcare elasticity reaches |brown elasticity| at B={b}")]
    ElasticityViolated { tau: f64, b: f64 },
    #[error("brown steady-state solver failed at tau={tau} (residual {residual:e})")]
    SolverFailure { tau: f64, residual: f64 },
}

/// Brown output and healthcare carried over from the previous period.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EconomyState {
    pub b_prev: f64,
    pub h_prev: f64,
}

impl EconomyState {
    /// No prior brown output or healthcare, so μ = 1.
    pub fn pristine() -> Self {
        Self::default()
    }

    /// State left behind by a brown steady state sustained under `tau_prev`.
    pub fn brown_sse(economy: &Economy, tau_prev: f64) -> Result<Self, LevelsError> {
        let ss = brown_steady_state(economy, tau_prev)?;
        Ok(Self { b_prev: ss.b, h_prev: tau_prev * ss.b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEquilibrium {
    pub tau: f64,
    pub j: f64,
    pub mu: f64,
    /// Relative price of the green good.
    pub p: f64,
    /// Wage in brown-good units.
    pub w: f64,
    pub g: f64,
    pub b: f64,
    pub h: f64,
    pub l_g: f64,
    pub l_b: f64,
    pub l_h: f64,
}

pub fn period_equilibrium(economy: &Economy, j: f64, state: EconomyState, tau: f64) -> PeriodEquilibrium {
    let j = j.clamp(0.0, 1.0);
    let mu = economy.forms().mu.value(state.b_prev.max(0.0), state.h_prev.max(0.0));
    let (a_g, a_b) = (economy.a_g(), economy.a_b());
    let p = a_b / a_g;
    let w = mu * a_b;
    let brown_share = 1.0 - j;
    let l_b = brown_share / (1.0 + tau);
    let l_h = tau * brown_share / (1.0 + tau);
    let b = brown_share * w / (1.0 + tau);
    PeriodEquilibrium { tau, j, mu, p, w, g: j * mu * a_g, b, h: tau * b, l_g: j, l_b, l_h }
}

/// Bang-bang demand of household `i`: the whole wage goes to green for
/// i ≤ j (the marginal household is assigned green), to brown otherwise.
pub fn household_demand(i: f64, j: f64, eq: &PeriodEquilibrium, tau: f64) -> (f64, f64) {
    if i <= j {
        (eq.w / eq.p, 0.0)
    } else {
        (0.0, eq.w / (1.0 + tau))
    }
}

/// Aggregate utility ∫u^i di in a period whose norm multiplier is `lambda`.
pub fn period_welfare(economy: &Economy, eq: &PeriodEquilibrium, lambda: f64) -> f64 {
    let green = lambda * economy.forms().gamma.integral_to(eq.j) * eq.w / eq.p;
    let brown = (1.0 - eq.j) * eq.w / (1.0 + eq.tau);
    green + brown
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyKind {
    Brown,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub kind: SteadyKind,
    pub tau: f64,
    pub j: f64,
    pub g: f64,
    pub b: f64,
    pub h: f64,
    pub mu: f64,
    pub welfare: f64,
    pub consumption_total: f64,
}

/// Residual of the brown steady-state equation B = μ(B, τB)·a_b/(1+τ).
pub fn brown_residual(economy: &Economy, tau: f64, b: f64) -> f64 {
    b - economy.forms().mu.on_path(b, tau) * economy.a_b() / (1.0 + tau)
}

/// Sign changes of the brown residual on an `n`-point grid of the bracket
/// [0, a_b/(1+τ)]; the root is unique when exactly one is found.
pub fn brown_root_sign_changes(economy: &Economy, tau: f64, n: usize) -> usize {
    let hi = economy.a_b() / (1.0 + tau);
    let signs: Vec<f64> = linspace(0.0, hi, n).map(|b| brown_residual(economy, tau, b)).collect();
    let mut changes = 0;
    let mut prev = signs[0].signum();
    for &s in &signs[1..] {
        if s == 0.0 {
            changes += 1;
            prev = 0.0;
            continue;
        }
        if prev != 0.0 && s.signum() != prev {
            changes += 1;
        }
        prev = s.signum();
    }
    changes
}

/// Steady state with j = 0: the unique root of the brown equation on
/// [0, a_b/(1+τ)], found by bisection.
pub fn brown_steady_state(economy: &Economy, tau: f64) -> Result<SteadyState, LevelsError> {
    let hi = economy.a_b() / (1.0 + tau);
    let mu = &economy.forms().mu;
    let check = mu.elasticity_check(tau, 0.0, hi);
    if !check.holds {
        return Err(LevelsError::ElasticityViolated { tau, b: check.violating_b.unwrap_or(check.worst_b) });
    }
    let f = |b: f64| brown_residual(economy, tau, b);
    let b =
        bisect(0.0, hi, f, 1e-15 * economy.a_b(), 200).ok_or(LevelsError::SolverFailure { tau, residual: f(hi) })?;
    let residual = f(b).abs();
    if residual > 1e-10 * economy.a_b() {
        return Err(LevelsError::SolverFailure { tau, residual });
    }
    let mut ss = SteadyState {
        kind: SteadyKind::Brown,
        tau,
        j: 0.0,
        g: 0.0,
        b,
        h: tau * b,
        mu: mu.on_path(b, tau),
        welfare: 0.0,
        consumption_total: b,
    };
    ss.welfare = welfare(&ss, economy);
    Ok(ss)
}

/// Steady state with j = 1: G* = a_g and no damage.
pub fn green_steady_state(economy: &Economy) -> SteadyState {
    let mut ss = SteadyState {
        kind: SteadyKind::Green,
        tau: 0.0,
        j: 1.0,
        g: economy.a_g(),
        b: 0.0,
        h: 0.0,
        mu: 1.0,
        welfare: 0.0,
        consumption_total: economy.a_g(),
    };
    ss.welfare = welfare(&ss, economy);
    ss
}

/// Aggregate utility in a steady state: B* for brown, λ(∞)·γ̂·G* for green.
pub fn welfare(ss: &SteadyState, economy: &Economy) -> f64 {
    match ss.kind {
        SteadyKind::Brown => ss.b,
        SteadyKind::Green => {
            let forms = economy.forms();
            forms.lambda.lambda_inf() * forms.gamma.mean() * ss.g
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GreenHigher,
    BrownHigher,
    Equal,
}

impl Verdict {
    fn of(green: f64, brown: f64) -> Self {
        if green > brown {
            Verdict::GreenHigher
        } else if green < brown {
            Verdict::BrownHigher
        } else {
            Verdict::Equal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SseComparison {
    pub tau: f64,
    pub green: SteadyState,
    pub brown: SteadyState,
    /// Both steady states locally attracting at this tax.
    pub bistable: bool,
    /// a_b ≤ a_g, sufficient for G* > B* under bistability.
    pub green_tech_at_least_brown: bool,
    pub consumption_verdict: Verdict,
    pub welfare_verdict: Verdict,
}

pub fn compare_sse(economy: &Economy, tau: f64) -> Result<SseComparison, LevelsError> {
    let green = green_steady_state(economy);
    let brown = brown_steady_state(economy, tau)?;
    Ok(SseComparison {
        tau,
        green,
        brown,
        bistable: economy.bistable(tau),
        green_tech_at_least_brown: economy.a_b() <= economy.a_g(),
        consumption_verdict: Verdict::of(green.g, brown.b),
        welfare_verdict: Verdict::of(green.welfare, brown.welfare),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RatioConvention;
    use crate::forms::*;
    use crate::reference::{ref1, ref1_forms};

    fn undamaged(a_g: f64, a_b: f64) -> Economy {
        let forms = FunctionalForms { mu: DamageCurve::none(), ..ref1_forms() };
        Economy::new(a_g, a_b, forms, RatioConvention::Share).unwrap()
    }

    /// B ↦ μ(B, τB)·a_b/(1+τ) iterated to a fixed point; the map is a
    /// contraction for the parameters used here.
    fn brown_by_iteration(economy: &Economy, tau: f64) -> f64 {
        let mut b = 0.0;
        for _ in 0..10_000 {
            b = economy.forms().mu.on_path(b, tau) * economy.a_b() / (1.0 + tau);
        }
        b
    }

    #[test]
    fn period_equilibrium_examples() {
        let e = ref1();
        let eq = period_equilibrium(&e, 1.0, EconomyState::pristine(), 0.7);
        assert_eq!((eq.p, eq.w, eq.g, eq.b, eq.h), (1.0, 1.0, 1.0, 0.0, 0.0));
        assert_eq!((eq.l_g, eq.l_b, eq.l_h), (1.0, 0.0, 0.0));

        let eq = period_equilibrium(&e, 0.0, EconomyState::pristine(), 0.0);
        assert_eq!((eq.b, eq.g, eq.h), (1.0, 0.0, 0.0));
        assert_eq!((eq.l_g, eq.l_b, eq.l_h), (0.0, 1.0, 0.0));

        let eq = period_equilibrium(&e, 0.0, EconomyState::pristine(), 0.5);
        assert!((eq.b - 2.0 / 3.0).abs() < 1e-15);
        assert!((eq.h - 1.0 / 3.0).abs() < 1e-15);
        assert!((eq.l_b - 2.0 / 3.0).abs() < 1e-15 && (eq.l_h - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn demand_examples() {
        let e = ref1();
        let eq = period_equilibrium(&e, 0.5, EconomyState::pristine(), 0.0);
        assert_eq!(household_demand(0.1, 0.5, &eq, 0.0), (1.0, 0.0));
        let eq = period_equilibrium(&e, 0.5, EconomyState::pristine(), 0.25);
        assert_eq!(household_demand(0.9, 0.5, &eq, 0.25), (0.0, 0.8));
        assert_eq!(household_demand(0.5, 0.5, &eq, 0.25), (1.0, 0.0));
    }

    #[test]
    fn demand_aggregates_to_outputs() {
        let e = ref1();
        let state = EconomyState { b_prev: 0.4, h_prev: 0.2 };
        for &(j, tau) in &[(0.37, 0.5), (0.0, 0.2), (0.91, 1.3)] {
            let eq = period_equilibrium(&e, j, state, tau);
            let n = 100_000;
            let (mut g, mut b) = (0.0, 0.0);
            for k in 0..n {
                let i = (k as f64 + 0.5) / n as f64;
                let (gi, bi) = household_demand(i, j, &eq, tau);
                g += gi / n as f64;
                b += bi / n as f64;
            }
            assert!((g - eq.g).abs() <= 1e-3 * eq.g.max(1e-12) + 1e-12);
            assert!((b - eq.b).abs() <= 1e-3 * eq.b.max(1e-12) + 1e-12);
        }
    }

    #[test]
    fn brown_steady_state_examples() {
        let e = undamaged(1.0, 1.0);
        assert!((brown_steady_state(&e, 0.0).unwrap().b - 1.0).abs() < 1e-12);
        assert!((brown_steady_state(&e, 0.5).unwrap().b - 2.0 / 3.0).abs() < 1e-12);

        let e = ref1();
        let ss = brown_steady_state(&e, 0.5).unwrap();
        let oracle = brown_by_iteration(&e, 0.5);
        assert!((ss.b - oracle).abs() < 1e-12);
        assert!((ss.b - 0.6002).abs() < 1e-4);
        assert!(brown_residual(&e, 0.5, ss.b).abs() <= 1e-10);
        assert_eq!(brown_root_sign_changes(&e, 0.5, 10_000), 1);
        assert_eq!(ss.welfare, ss.b);
    }

    #[test]
    fn brown_steady_state_requires_elasticity() {
        let forms = FunctionalForms { mu: DamageCurve::exponential(0.2, 0.05).unwrap(), ..ref1_forms() };
        let e = Economy::new(1.0, 1.0, forms, RatioConvention::Share).unwrap();
        let err = brown_steady_state(&e, 5.0).unwrap_err();
        assert!(matches!(err, LevelsError::ElasticityViolated { .. }));
        assert!(err.to_string().contains("(elast)"));
    }

    #[test]
    fn green_steady_state_examples() {
        assert_eq!(green_steady_state(&ref1()).g, 1.0);
        let e = undamaged(2.5, 1.0);
        let ss = green_steady_state(&e);
        assert_eq!((ss.g, ss.b, ss.h, ss.mu), (2.5, 0.0, 0.0, 1.0));
        assert!((green_steady_state(&ref1()).welfare - 2.5).abs() < 1e-15);
    }

    #[test]
    fn compare_examples() {
        let e = ref1();
        let c = compare_sse(&e, 0.0).unwrap();
        assert!((c.brown.b - brown_by_iteration(&e, 0.0)).abs() < 1e-12);
        assert!((c.brown.b - 0.8446).abs() < 1e-4);
        assert_eq!(c.consumption_verdict, Verdict::GreenHigher);
        assert_eq!(c.welfare_verdict, Verdict::GreenHigher);
        assert!(c.bistable && c.green_tech_at_least_brown);

        let c = compare_sse(&undamaged(0.5, 1.0), 0.0).unwrap();
        assert!(!c.green_tech_at_least_brown);
        assert_eq!((c.green.g, c.brown.b), (0.5, 1.0));
        assert_eq!(c.consumption_verdict, Verdict::BrownHigher);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn clearing_budget_and_zero_profit(j in 0.0f64..=1.0, tau in 0.0f64..5.0, b_prev in 0.0f64..3.0, h_prev in 0.0f64..3.0, a_g in 0.2f64..3.0, a_b in 0.2f64..3.0) {
                let forms = ref1_forms();
                let e = Economy::new(a_g, a_b, forms, RatioConvention::Share).unwrap();
                let eq = period_equilibrium(&e, j, EconomyState { b_prev, h_prev }, tau);
                prop_assert!((eq.l_g + eq.l_b + eq.l_h - 1.0).abs() <= 1e-12);
                prop_assert!((eq.h - tau * eq.b).abs() <= 1e-12);
                prop_assert!((eq.p * eq.mu * a_g - eq.w).abs() <= 1e-12);
                prop_assert!((eq.w - eq.mu * a_b).abs() <= 1e-12);
            }
        }
    }
}
