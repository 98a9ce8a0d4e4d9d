//! Seeded random economies and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use green_transition::dynamics::{Economy, RatioConvention};
use green_transition::forms::{
    DamageCurve, DamageShape, FunctionalForms, NormShape, PreferenceCurve, PreferenceShape, SocialNormCurve,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sampling {
    /// Only affine γ (closed-form mean).
    pub affine_only: bool,
    /// a_b ≤ a_g.
    pub green_tech_advantage: bool,
}

pub fn random_economy(rng: &mut ChaCha8Rng, s: Sampling) -> Economy {
    let a_g = rng.gen_range(0.5..2.0);
    let a_b = if s.green_tech_advantage { a_g * rng.gen_range(0.5..1.0) } else { rng.gen_range(0.5..2.0) };
    let gamma_max = rng.gen_range(0.8..3.0);
    let gamma_min = gamma_max * rng.gen_range(0.1..0.9);
    let gamma = if s.affine_only || rng.gen_bool(0.5) {
        PreferenceCurve::affine(gamma_max, gamma_min)
    } else {
        PreferenceCurve::new(gamma_max, gamma_min, PreferenceShape::Power { exponent: rng.gen_range(0.3..3.0) })
    }
    .unwrap();
    let lambda_0 = rng.gen_range(0.1..1.0);
    let lambda_inf = lambda_0 + rng.gen_range(0.2..4.0);
    let lambda = if rng.gen_bool(0.5) {
        SocialNormCurve::saturating(lambda_0, lambda_inf)
    } else {
        SocialNormCurve::new(lambda_0, lambda_inf, NormShape::Exponential { rate: rng.gen_range(0.2..3.0) })
    }
    .unwrap();
    let delta_b = rng.gen_range(0.01..0.5);
    let delta_h = delta_b * rng.gen_range(0.0..0.2);
    let shape = if rng.gen_bool(0.5) { DamageShape::Exponential } else { DamageShape::Rational };
    let mu = DamageCurve::new(delta_b, delta_h, shape).unwrap();
    let convention = if rng.gen_bool(0.5) { RatioConvention::Share } else { RatioConvention::Market };
    Economy::new(a_g, a_b, FunctionalForms { gamma, lambda, mu }, convention).unwrap()
}

/// Draws economies until `accept` holds.
pub fn random_economy_where(rng: &mut ChaCha8Rng, s: Sampling, accept: impl Fn(&Economy) -> bool) -> Economy {
    loop {
        let e = random_economy(rng, s);
        if accept(&e) {
            return e;
        }
    }
}

/// Population of `n + 1` households at i = k/n with their intrinsic
/// preferences evaluated once.
pub struct Households<'a> {
    economy: &'a Economy,
    n: usize,
    gamma: Vec<f64>,
}

impl<'a> Households<'a> {
    pub fn new(economy: &'a Economy, n: usize) -> Self {
        let gamma = (0..=n).map(|k| economy.forms().gamma.value(k as f64 / n as f64)).collect();
        Self { economy, n, gamma }
    }

    /// Next-period green share.
    ///
    /// Household i buys green when γ(i) ≥ a_b/(λ·(1+τ)·a_g), using γ values
    /// only (no inverse). Counting green households locates the cutoff to
    /// one cell; a bisection on the same rule refines it inside that cell.
    pub fn share(&self, j: f64, tau: f64) -> f64 {
        let e = self.economy;
        let forms = e.forms();
        let lambda = forms.lambda.value(e.green_ratio(j, tau));
        let cutoff = e.a_b() / (lambda * (1.0 + tau) * e.a_g());
        let buys_green = |gamma: f64| gamma >= cutoff;
        let greens = self.gamma.iter().filter(|&&g| buys_green(g)).count();
        if greens == 0 {
            return 0.0;
        }
        if greens == self.n + 1 {
            return 1.0;
        }
        let cell = 1.0 / self.n as f64;
        let (mut lo, mut hi) = ((greens - 1) as f64 * cell, greens as f64 * cell);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if buys_green(forms.gamma.value(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}
