//! The reference economy used throughout the docs and tests.
//!
//! Symmetric technology (a_g = a_b = 1), affine γ from 1.5 down to 0.5,
//! saturating λ from 0.5 up to 2.5, exponential damage with δ_B = 0.2 and
//! δ_H = 0.05, and the share ratio convention. With these choices
//! λ(r(j)) = 0.5 + 2j, so the interior fixed points of ψ solve a quadratic.

use crate::dynamics::{Economy, RatioConvention};
use crate::forms::{DamageCurve, FunctionalForms, PreferenceCurve, SocialNormCurve};

pub fn ref1_forms() -> FunctionalForms {
    FunctionalForms {
        gamma: PreferenceCurve::affine(1.5, 0.5).expect("valid gamma"),
        lambda: SocialNormCurve::saturating(0.5, 2.5).expect("valid lambda"),
        mu: DamageCurve::exponential(0.2, 0.05).expect("valid damage"),
    }
}

pub fn ref1() -> Economy {
    Economy::new(1.0, 1.0, ref1_forms(), RatioConvention::Share).expect("valid economy")
}
