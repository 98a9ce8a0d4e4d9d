mod common;

use common::{random_economy, random_economy_where, rng, Sampling};
use green_transition::dynamics::{converge, iterate, Economy, RatioConvention, SolverConfig};
use green_transition::forms::{FunctionalForms, SocialNormCurve};
use green_transition::levels::EconomyState;
use green_transition::policy::{
    constant_tax_works, lambda_at, min_constant_tax, simulate_policy, synthesize_schedule, tau_hat, PolicyConfig,
    PolicyError, TaxSchedule,
};
use green_transition::reference::{ref1, ref1_forms};
use proptest::prelude::*;

const MARGIN: f64 = 1e-6;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

/// Economies where λ(∞)γ(1) > a_b/a_g, so a tax can be dropped eventually.
fn lock_in_economy(seed: u64) -> Economy {
    random_economy_where(&mut rng(seed), Sampling::default(), |e| e.green_lock_in_holds(0.0))
}

/// Runs the full simulation for `horizon` periods and checks the share ends at 1.
fn ends_green(e: &Economy, schedule: &TaxSchedule, j0: f64, horizon: usize) -> bool {
    let report = simulate_policy(e, schedule, j0, EconomyState::pristine(), horizon, &SolverConfig::default());
    (report.trajectory.last() - 1.0).abs() < 1e-9
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn threshold_tax_is_largest_for_the_least_green_household(
        seed in any::<u64>(), j in 0.0f64..1.0, lambda in 0.05f64..5.0,
    ) {
        let e = random_economy(&mut rng(seed), Sampling::default());
        let (low, high) = (tau_hat(&e, j, lambda), tau_hat(&e, 1.0, lambda));
        prop_assert!(low <= high);
        if low > 0.0 && e.forms().gamma.value(j) > e.forms().gamma.value(1.0) {
            prop_assert!(low < high);
        }
    }

    #[test]
    fn minimal_constant_tax_is_sound_and_minimal(seed in any::<u64>(), j0 in 0.0f64..0.9) {
        let e = random_economy(&mut rng(seed), Sampling::default());
        let cfg = PolicyConfig::default();
        let tau = min_constant_tax(&e, j0, MARGIN, &cfg).unwrap();
        // Near j = 1 the margin only forces steps proportional to 1 − j, so
        // the horizon comes from the share iteration itself.
        let steps = converge(&e, j0, tau, &cfg.solver).shares.len();
        prop_assert!(ends_green(&e, &TaxSchedule::constant(tau), j0, steps + 5));
        let below = tau - 10.0 * cfg.bisection_tol;
        if below >= 0.0 {
            prop_assert!(!constant_tax_works(&e, j0, MARGIN, below, &cfg));
        }
    }

    #[test]
    fn minimal_constant_tax_falls_as_the_start_gets_greener(seed in any::<u64>(), a in 0.0f64..0.9, b in 0.0f64..0.9) {
        let e = random_economy(&mut rng(seed), Sampling::default());
        let cfg = PolicyConfig::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = min_constant_tax(&e, lo, MARGIN, &cfg).unwrap();
        let t_hi = min_constant_tax(&e, hi, MARGIN, &cfg).unwrap();
        prop_assert!(t_hi <= t_lo + 10.0 * cfg.bisection_tol, "j0 {lo}->{hi}: {t_lo} -> {t_hi}");
    }

    #[test]
    fn minimal_constant_tax_falls_with_baseline_norm(seed in any::<u64>(), bump in 0.0f64..0.5, j0 in 0.0f64..0.5) {
        let e = random_economy(&mut rng(seed), Sampling::default());
        let f = *e.forms();
        let l0 = f.lambda.lambda_0();
        let stronger_lambda = SocialNormCurve::new((l0 + bump).min(f.lambda.lambda_inf() - 1e-3), f.lambda.lambda_inf(), f.lambda.shape()).unwrap();
        let stronger = Economy::new(e.a_g(), e.a_b(), FunctionalForms { lambda: stronger_lambda, ..f }, e.ratio_convention()).unwrap();
        let cfg = PolicyConfig::default();
        let weak = min_constant_tax(&e, j0, MARGIN, &cfg).unwrap();
        let strong = min_constant_tax(&stronger, j0, MARGIN, &cfg).unwrap();
        prop_assert!(strong <= weak + 10.0 * cfg.bisection_tol, "{weak} -> {strong}");
    }

    #[test]
    fn synthesized_schedules_are_sound_and_removable(seed in any::<u64>(), j0 in 0.0f64..0.9) {
        let e = lock_in_economy(seed);
        let cfg = PolicyConfig::default();
        let schedule = match synthesize_schedule(&e, j0, MARGIN, 400, &cfg) {
            Ok(s) => s,
            // Slow escapes past a barrier can exceed the horizon.
            Err(PolicyError::Infeasible { reason, .. }) => {
                prop_assert!(reason.contains("horizon"), "{reason}");
                return Ok(());
            }
        };
        prop_assert!(ends_green(&e, &schedule, j0, 400));
        prop_assert!(schedule.rates.windows(2).all(|w| w[1] <= w[0]));
        let removal = schedule.removal_period.expect("lock-in economies drop the tax");
        let before = iterate(&e, j0, &schedule.rates, removal, &SolverConfig::default()).last();
        let after = converge(&e, before, 0.0, &SolverConfig::default());
        prop_assert!((after.last() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn threshold_taxes_for_the_reference_economy() {
    let e = ref1();
    let lambda = lambda_at(&e, 0.0, 0.0);
    assert_eq!(lambda, 0.5);
    assert!((tau_hat(&e, 1.0, lambda) - 3.0).abs() < 1e-12);
    assert!((tau_hat(&e, 0.0, lambda) - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn weak_norms_need_a_permanent_tax() {
    let forms = FunctionalForms { lambda: SocialNormCurve::saturating(0.5, 1.8).unwrap(), ..ref1_forms() };
    let e = Economy::new(1.0, 1.0, forms, RatioConvention::Share).unwrap();
    let schedule = synthesize_schedule(&e, 0.0, MARGIN, 200, &PolicyConfig::default()).unwrap();
    assert_eq!(schedule.removal_period, None);
    let floor = 1.0 / (1.8 * 0.5) - 1.0;
    assert!(*schedule.rates.last().unwrap() >= floor);
    assert!(ends_green(&e, &schedule, 0.0, 200));
}
