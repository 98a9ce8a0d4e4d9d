//! Brown-good tax design: indifference thresholds, the smallest constant
//! tax that tips the economy green, temporary schedules that lift the share
//! over the tipping barrier and then step down, and full simulation of a
//! schedule with per-period levels and welfare.

use crate::dynamics::{
    find_fixed_points, iterate, match_fixed_point, rate_at, settle, Economy, SolverConfig, Stability, Trajectory,
};
use crate::levels::{
    brown_steady_state, green_steady_state, period_equilibrium, period_welfare, EconomyState, SteadyState,
};
use crate::numeric::{bisect_predicate, linspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum PolicyError {
    #[error("no tax up to {cap} reaches the green state from j0={j0}: {reason} (stalls at j={stall_j})")]
    Infeasible { j0: f64, cap: f64, stall_j: f64, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    /// Largest rate the searches consider before declaring infeasibility.
    pub tax_cap: f64,
    pub bisection_tol: f64,
    #[serde(skip)]
    pub solver: SolverConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { tax_cap: 100.0, bisection_tol: 1e-8, solver: SolverConfig::default() }
    }
}

/// Per-period tax rates; the last rate extends indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxSchedule {
    pub rates: Vec<f64>,
    /// First period from which the tax is zero forever.
    pub removal_period: Option<usize>,
}

impl TaxSchedule {
    pub fn constant(tau: f64) -> Self {
        Self::from_rates(vec![tau])
    }

    pub fn from_rates(rates: Vec<f64>) -> Self {
        debug_assert!(rates.iter().all(|&r| r >= 0.0));
        let removal_period = match rates.last() {
            Some(&0.0) => Some(rates.iter().rposition(|&r| r != 0.0).map_or(0, |k| k + 1)),
            _ => None,
        };
        Self { rates, removal_period }
    }

    pub fn rate(&self, t: usize) -> f64 {
        rate_at(&self.rates, t)
    }
}

/// Rate making household `j_target` indifferent between the goods when the
/// norm multiplier is `lambda_t`: a_b/(a_g·λ_t·γ(j)) − 1, floored at zero.
pub fn tau_hat(economy: &Economy, j_target: f64, lambda_t: f64) -> f64 {
    let gamma = economy.forms().gamma.value(j_target);
    (economy.a_b() / (economy.a_g() * lambda_t * gamma) - 1.0).max(0.0)
}

/// λ implied by share `j` under tax `tau`.
pub fn lambda_at(economy: &Economy, j: f64, tau: f64) -> f64 {
    economy.forms().lambda.value(economy.green_ratio(j, tau))
}

/// Lower edge of the basin of j = 1 under a constant tax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "j")]
pub enum Threshold {
    /// Largest non-stable interior fixed point; shares above it go green.
    Barrier(f64),
    /// No interior fixed point and j = 1 attracts: every positive share goes green.
    NoBarrier,
    /// j = 1 does not attract from below.
    NoEscape,
}

pub fn unstable_threshold(economy: &Economy, tau: f64, cfg: &SolverConfig) -> Threshold {
    let fps = find_fixed_points(economy, tau, cfg);
    let green_attracts = fps.last().is_some_and(|fp| fp.j == 1.0 && fp.kind == Stability::Stable);
    if !green_attracts {
        return Threshold::NoEscape;
    }
    match fps.iter().filter(|fp| fp.j > 0.0 && fp.j < 1.0).map(|fp| fp.j).next_back() {
        Some(j) => Threshold::Barrier(j),
        None => Threshold::NoBarrier,
    }
}

/// Whether constant-`tau` iteration from `j` converges to 1, given the
/// threshold computed for that tax.
pub fn in_green_basin(economy: &Economy, j: f64, tau: f64, threshold: Threshold) -> bool {
    match threshold {
        Threshold::Barrier(b) => j > b,
        Threshold::NoBarrier => j > 0.0 || economy.psi(0.0, tau) > 0.0,
        Threshold::NoEscape => j >= 1.0,
    }
}

fn reaches_green(economy: &Economy, j0: f64, tau: f64, cfg: &SolverConfig) -> bool {
    let (j, _) = settle(economy, j0, tau, cfg);
    (1.0 - j).abs() < 1e-9
}

/// Smallest constant tax, to within `bisection_tol`, under which the share
/// climbs from `j0` to 1 with ψ(j;τ) − j ≥ margin·(1−j) on every grid point
/// of [j0, 1).
pub fn min_constant_tax(economy: &Economy, j0: f64, margin: f64, cfg: &PolicyConfig) -> Result<f64, PolicyError> {
    let accepts = |tau: f64| constant_tax_works(economy, j0, margin, tau, cfg);
    if accepts(0.0) {
        return Ok(0.0);
    }
    if !accepts(cfg.tax_cap) {
        let (stall_j, _) = settle(economy, j0, cfg.tax_cap, &cfg.solver);
        return Err(PolicyError::Infeasible {
            j0,
            cap: cfg.tax_cap,
            stall_j,
            reason: "constant tax at the cap does not tip the economy",
        });
    }
    Ok(bisect_predicate(0.0, cfg.tax_cap, accepts, cfg.bisection_tol, 200))
}

/// The acceptance predicate used by [`min_constant_tax`].
pub fn constant_tax_works(economy: &Economy, j0: f64, margin: f64, tau: f64, cfg: &PolicyConfig) -> bool {
    let climbs = linspace(j0, 1.0, cfg.solver.grid_points)
        .filter(|&j| j < 1.0)
        .all(|j| economy.psi(j, tau) - j >= margin * (1.0 - j));
    climbs && reaches_green(economy, j0, tau, &cfg.solver)
}

/// Long-run rate of a schedule: zero when λ(∞)γ(1) > a_b/a_g, otherwise
/// just enough to make j = 1 locally attracting.
pub fn continuation_rate(economy: &Economy, margin: f64) -> f64 {
    if economy.green_lock_in_holds(0.0) {
        return 0.0;
    }
    let forms = economy.forms();
    let lock = economy.a_b() / (economy.a_g() * forms.lambda.lambda_inf() * forms.gamma.gamma_min());
    lock * (1.0 + margin) - 1.0
}

/// Builds a schedule that moves the economy from `j0` into the basin of
/// j = 1 of the continuation rate and then holds that rate.
///
/// While the share is outside that basin, the period's rate is the
/// smallest one lifting next period's share to ĵ + margin·(1−ĵ), where ĵ
/// is the tipping barrier under the continuation rate.
pub fn synthesize_schedule(
    economy: &Economy,
    j0: f64,
    margin: f64,
    t_max: usize,
    cfg: &PolicyConfig,
) -> Result<TaxSchedule, PolicyError> {
    let solver = &cfg.solver;
    let tail = continuation_rate(economy, margin);
    let threshold = unstable_threshold(economy, tail, solver);
    let target = match threshold {
        Threshold::Barrier(b) => b + margin * (1.0 - b),
        Threshold::NoBarrier => margin,
        Threshold::NoEscape => {
            return Err(PolicyError::Infeasible {
                j0,
                cap: cfg.tax_cap,
                stall_j: j0,
                reason: "green state not attracting at the continuation rate",
            });
        }
    };

    let mut rates = Vec::with_capacity(t_max);
    let mut j = j0.clamp(0.0, 1.0);
    for _ in 0..t_max.max(1) {
        let tau = if in_green_basin(economy, j, tail, threshold) {
            tail
        } else {
            if economy.psi(j, cfg.tax_cap) < target {
                return Err(PolicyError::Infeasible {
                    j0,
                    cap: cfg.tax_cap,
                    stall_j: j,
                    reason: "cannot lift the share over the barrier",
                });
            }
            let lifts = |tau: f64| economy.psi(j, tau) >= target;
            if lifts(tail) {
                tail
            } else {
                bisect_predicate(tail, cfg.tax_cap, lifts, cfg.bisection_tol, 200)
            }
        };
        rates.push(tau);
        j = economy.psi(j, tau);
    }

    let check = iterate(economy, j0, &rates, t_max.max(1), solver);
    let end = check.last();
    if (1.0 - end).abs() >= 1e-9 {
        return Err(PolicyError::Infeasible {
            j0,
            cap: cfg.tax_cap,
            stall_j: end,
            reason: "schedule does not reach j = 1 within the horizon",
        });
    }
    let mut schedule = TaxSchedule::from_rates(rates);
    if tail > 0.0 {
        schedule.removal_period = None;
    }
    Ok(schedule)
}

/// One emitted period of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub tau: f64,
    pub j: f64,
    pub mu: f64,
    pub p: f64,
    pub w: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub l_g: f64,
    pub l_b: f64,
    pub l_h: f64,
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyReport {
    pub schedule: TaxSchedule,
    pub trajectory: Trajectory,
    pub records: Vec<PeriodRecord>,
    pub welfare_path: Vec<f64>,
    pub cumulative_welfare: f64,
    pub terminal: Option<SteadyState>,
}

/// Runs the share dynamics and the levels recursion together for
/// `horizon` periods.
///
/// Period t uses the norm multiplier formed from period t−1's consumption
/// ratio; period 0 takes it from the ratio implied by `j0`.
pub fn simulate_policy(
    economy: &Economy,
    schedule: &TaxSchedule,
    j0: f64,
    initial_state: EconomyState,
    horizon: usize,
    cfg: &SolverConfig,
) -> PolicyReport {
    let mut records = Vec::with_capacity(horizon);
    let mut shares = Vec::with_capacity(horizon + 1);
    let mut taus = Vec::with_capacity(horizon);
    let mut state = initial_state;
    let mut j = j0.clamp(0.0, 1.0);
    let mut lambda = lambda_at(economy, j, schedule.rate(0));
    shares.push(j);
    for t in 0..horizon {
        let tau = schedule.rate(t);
        let eq = period_equilibrium(economy, j, state, tau);
        let welfare = period_welfare(economy, &eq, lambda);
        records.push(PeriodRecord {
            t,
            tau,
            j,
            mu: eq.mu,
            p: eq.p,
            w: eq.w,
            g: eq.g,
            b: eq.b,
            h: eq.h,
            l_g: eq.l_g,
            l_b: eq.l_b,
            l_h: eq.l_h,
            welfare,
        });
        taus.push(tau);
        lambda = lambda_at(economy, j, tau);
        j = economy.psi(j, tau);
        state = EconomyState { b_prev: eq.b, h_prev: eq.h };
        shares.push(j);
    }

    let welfare_path: Vec<f64> = records.iter().map(|r| r.welfare).collect();
    let cumulative_welfare = welfare_path.iter().sum();
    let terminal = identify_terminal(economy, &records, &shares);
    let settled = shares.len() > cfg.convergence_streak
        && shares.windows(2).rev().take(cfg.convergence_streak).all(|w| (w[1] - w[0]).abs() < cfg.convergence_tol);
    let converged_to =
        if settled { match_fixed_point(economy, *shares.last().unwrap(), schedule.rate(horizon), cfg) } else { None };
    PolicyReport {
        schedule: schedule.clone(),
        trajectory: Trajectory { shares, taus, converged_to },
        records,
        welfare_path,
        cumulative_welfare,
        terminal,
    }
}

fn identify_terminal(economy: &Economy, records: &[PeriodRecord], shares: &[f64]) -> Option<SteadyState> {
    let [.., prev, last] = records else { return None };
    let j_end = *shares.last()?;
    let settled = (last.j - prev.j).abs() <= 1e-9
        && (j_end - last.j).abs() <= 1e-9
        && (last.b - prev.b).abs() <= 1e-9
        && (last.h - prev.h).abs() <= 1e-9;
    if !settled {
        return None;
    }
    if (1.0 - j_end).abs() <= 1e-9 {
        Some(green_steady_state(economy))
    } else if j_end.abs() <= 1e-9 {
        brown_steady_state(economy, last.tau).ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RatioConvention;
    use crate::forms::*;
    use crate::levels::SteadyKind;
    use crate::reference::{ref1, ref1_forms};

    fn barrier_zero_tax() -> f64 {
        (2.5 - 4.25f64.sqrt()) / 4.0
    }

    fn weak_norm() -> Economy {
        // λ(∞)γ(1) = 0.9 < a_b/a_g = 1
        let forms = FunctionalForms { lambda: SocialNormCurve::saturating(0.5, 1.8).unwrap(), ..ref1_forms() };
        Economy::new(1.0, 1.0, forms, RatioConvention::Share).unwrap()
    }

    #[test]
    fn tau_hat_examples() {
        let e = ref1();
        assert!((tau_hat(&e, 1.0, 0.5) - 3.0).abs() < 1e-12);
        let jhat = barrier_zero_tax();
        let expected = 1.0 / (0.5 * (1.5 - jhat)) - 1.0;
        assert!((tau_hat(&e, jhat, 0.5) - expected).abs() < 1e-12);
        assert!((tau_hat(&e, jhat, 0.5) - 0.4385).abs() < 1e-3);
        assert_eq!(tau_hat(&e, 0.0, 1.0), 0.0);
    }

    #[test]
    fn thresholds() {
        let e = ref1();
        let cfg = SolverConfig::default();
        match unstable_threshold(&e, 0.0, &cfg) {
            Threshold::Barrier(j) => assert!((j - barrier_zero_tax()).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
        assert_eq!(unstable_threshold(&e, 0.45, &cfg), Threshold::NoBarrier);
        let c: f64 = 1.0 / 1.3 - 0.75;
        let oracle = (2.5 - (6.25 - 8.0 * c).sqrt()) / 4.0;
        match unstable_threshold(&e, 0.3, &cfg) {
            Threshold::Barrier(j) => {
                assert!((j - oracle).abs() < 1e-10);
                assert!((j - 0.0077).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(unstable_threshold(&weak_norm(), 0.0, &cfg), Threshold::NoEscape);
    }

    #[test]
    fn min_constant_tax_reference() {
        let e = ref1();
        let cfg = PolicyConfig::default();
        let tau = min_constant_tax(&e, 0.0, 1e-6, &cfg).unwrap();
        // ψ(0;τ) = 1.5 − 2/(1+τ) ≥ margin  ⇔  τ ≥ 2/(1.5 − margin) − 1
        let oracle = 2.0 / (1.5 - 1e-6) - 1.0;
        assert!(tau >= oracle && tau - oracle < 2e-8, "tau={tau} oracle={oracle}");
        assert!(tau >= tau_hat(&e, 0.0, lambda_at(&e, 0.0, 0.0)) - 1e-8);
        assert!(!constant_tax_works(&e, 0.0, 1e-6, tau - 10.0 * cfg.bisection_tol, &cfg));
        assert_eq!(min_constant_tax(&e, 0.5, 1e-6, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn min_constant_tax_infeasible_under_small_cap() {
        let cfg = PolicyConfig { tax_cap: 0.05, ..PolicyConfig::default() };
        let err = min_constant_tax(&weak_norm(), 0.0, 1e-6, &cfg).unwrap_err();
        assert!(matches!(err, PolicyError::Infeasible { .. }));
    }

    #[test]
    fn synthesized_reference_schedule() {
        let e = ref1();
        let cfg = PolicyConfig::default();
        let s = synthesize_schedule(&e, 0.0, 1e-6, 50, &cfg).unwrap();
        assert_eq!(s.removal_period, Some(1));
        assert!((s.rates[0] - 0.4385).abs() < 1e-3);
        assert!(s.rates[1..].iter().all(|&r| r == 0.0));
        let j1 = e.psi(0.0, s.rates[0]);
        assert!(j1 > barrier_zero_tax());

        let s = synthesize_schedule(&e, 0.5, 1e-6, 50, &cfg).unwrap();
        assert!(s.rates.iter().all(|&r| r == 0.0));
        assert_eq!(s.removal_period, Some(0));
    }

    #[test]
    fn weak_norm_needs_permanent_tax() {
        let e = weak_norm();
        let cfg = PolicyConfig::default();
        let s = synthesize_schedule(&e, 0.0, 1e-6, 200, &cfg).unwrap();
        assert_eq!(s.removal_period, None);
        let floor = 1.0 / (1.8 * 0.5) - 1.0;
        assert!(*s.rates.last().unwrap() >= floor);
        assert!(s.rates.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn removal_period_from_rates() {
        assert_eq!(TaxSchedule::from_rates(vec![0.45, 0.0]).removal_period, Some(1));
        assert_eq!(TaxSchedule::from_rates(vec![0.0]).removal_period, Some(0));
        assert_eq!(TaxSchedule::from_rates(vec![0.3, 0.0, 0.2]).removal_period, None);
        assert_eq!(TaxSchedule::from_rates(vec![0.3, 0.0, 0.2, 0.0, 0.0]).removal_period, Some(3));
    }

    #[test]
    fn brown_persistence_run() {
        let e = ref1();
        let cfg = SolverConfig::default();
        let state = EconomyState::brown_sse(&e, 0.0).unwrap();
        let r = simulate_policy(&e, &TaxSchedule::constant(0.0), 0.0, state, 20, &cfg);
        let b_star = state.b_prev;
        for rec in &r.records {
            assert!((rec.b - b_star).abs() < 1e-10);
            assert!((rec.welfare - b_star).abs() < 1e-10);
        }
        assert_eq!(r.terminal.unwrap().kind, SteadyKind::Brown);
    }

    #[test]
    fn temporary_tax_dips_then_rises() {
        let e = ref1();
        let cfg = SolverConfig::default();
        let state = EconomyState::brown_sse(&e, 0.0).unwrap();
        let r = simulate_policy(&e, &TaxSchedule::from_rates(vec![0.45, 0.0]), 0.0, state, 30, &cfg);
        assert!(r.welfare_path[0] < state.b_prev);
        assert!((r.welfare_path.last().unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(r.terminal.unwrap().kind, SteadyKind::Green);
        assert_eq!(r.trajectory.converged_to.unwrap().j, 1.0);
    }
}
