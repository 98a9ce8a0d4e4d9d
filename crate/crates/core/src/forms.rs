//! Parameterized curve families for the three primitives of the model:
//! the intrinsic green preference γ(i), the social-norm multiplier λ(r)
//! and the health/productivity multiplier μ(B, H).
//!
//! Every curve validates itself on construction and is immutable
//! afterwards; evaluation is pure, so curves can be shared freely across
//! threads.

use crate::numeric::{bisect, integrate, linspace};
use thiserror::Error;

/// Errors raised when a curve is built from inadmissible parameters or
/// evaluated outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormsError {
    #[error("gamma strictly decreasing: need gamma_max > gamma_min > 0 (got {gamma_max}, {gamma_min})")]
    GammaNotDecreasing { gamma_max: f64, gamma_min: f64 },
    #[error("lambda increasing: need lambda_inf > lambda_0 > 0 (got {lambda_0}, {lambda_inf})")]
    LambdaNotIncreasing { lambda_0: f64, lambda_inf: f64 },
    #[error("damage intensities must be finite and nonnegative (got delta_b={delta_b}, delta_h={delta_h})")]
    NegativeDamage { delta_b: f64, delta_h: f64 },
    #[error("shape parameter {name} must be finite and positive (got {value})")]
    BadShape { name: &'static str, value: f64 },
    #[error("{curve} failed the invariant check at {at}")]
    InvariantViolated { curve: &'static str, at: f64 },
    #[error("household index {0} outside [0, 1]")]
    IndexOutOfRange(f64),
    #[error("preference weight {value} outside [{lo}, {hi}]")]
    WeightOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("negative consumption ratio {0}")]
    NegativeRatio(f64),
    #[error("negative damage input B={b}, H={h}")]
    NegativeDamageInput { b: f64, h: f64 },
}

/// Tolerance used by the bisection inverse of non-affine preference curves.
pub const INVERSE_TOL: f64 = 1e-10;

/// Green-to-brown consumption ratio, with an explicit sentinel for the
/// all-green economy where the ratio diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn as_f64(self) -> f64 {
        match self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

impl From<f64> for Ratio {
    fn from(r: f64) -> Self {
        if r.is_infinite() && r > 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(r)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreferenceShape {
    /// γ(i) = γ_max − (γ_max − γ_min)·i
    Affine,
    /// γ(i) = γ_min + (γ_max − γ_min)·(1 − i)^exponent
    Power { exponent: f64 },
}

/// Intrinsic preference for the green good, strictly decreasing in the
/// household index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceCurve {
    gamma_max: f64,
    gamma_min: f64,
    shape: PreferenceShape,
}

impl PreferenceCurve {
    pub fn affine(gamma_max: f64, gamma_min: f64) -> Result<Self, FormsError> {
        Self::new(gamma_max, gamma_min, PreferenceShape::Affine)
    }

    pub fn new(gamma_max: f64, gamma_min: f64, shape: PreferenceShape) -> Result<Self, FormsError> {
        if !(gamma_min.is_finite() && gamma_max.is_finite() && gamma_min > 0.0 && gamma_max > gamma_min) {
            return Err(FormsError::GammaNotDecreasing { gamma_max, gamma_min });
        }
        if let PreferenceShape::Power { exponent } = shape {
            if !(exponent.is_finite() && exponent > 0.0) {
                return Err(FormsError::BadShape { name: "gamma exponent", value: exponent });
            }
        }
        let curve = Self { gamma_max, gamma_min, shape };
        curve.check_invariants()?;
        Ok(curve)
    }

    fn check_invariants(&self) -> Result<(), FormsError> {
        if self.shape == PreferenceShape::Affine {
            return Ok(());
        }
        let mut prev = f64::INFINITY;
        for i in linspace(0.0, 1.0, 1001) {
            let v = self.value(i);
            if !(v > 0.0 && v < prev) {
                return Err(FormsError::InvariantViolated { curve: "gamma", at: i });
            }
            prev = v;
        }
        Ok(())
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn shape(&self) -> PreferenceShape {
        self.shape
    }

    /// γ(i), checking that `i` lies in [0, 1].
    pub fn eval(&self, i: f64) -> Result<f64, FormsError> {
        if !(0.0..=1.0).contains(&i) {
            return Err(FormsError::IndexOutOfRange(i));
        }
        Ok(self.value(i))
    }

    /// γ(i) without the domain check; `i` is clamped to [0, 1].
    pub fn value(&self, i: f64) -> f64 {
        let i = i.clamp(0.0, 1.0);
        let span = self.gamma_max - self.gamma_min;
        match self.shape {
            PreferenceShape::Affine => self.gamma_max - span * i,
            PreferenceShape::Power { exponent } => self.gamma_min + span * (1.0 - i).powf(exponent),
        }
    }

    /// The unique household index with γ(i) = v.
    pub fn inverse(&self, v: f64) -> Result<f64, FormsError> {
        if !(v >= self.gamma_min && v <= self.gamma_max) {
            return Err(FormsError::WeightOutOfRange { value: v, lo: self.gamma_min, hi: self.gamma_max });
        }
        if v == self.gamma_max {
            return Ok(0.0);
        }
        if v == self.gamma_min {
            return Ok(1.0);
        }
        Ok(match self.shape {
            PreferenceShape::Affine => ((self.gamma_max - v) / (self.gamma_max - self.gamma_min)).clamp(0.0, 1.0),
            PreferenceShape::Power { .. } => bisect(0.0, 1.0, |i| self.value(i) - v, INVERSE_TOL, 200).unwrap_or(0.0),
        })
    }

    /// ∫₀ʲ γ(i) di under the uniform household measure.
    pub fn integral_to(&self, j: f64) -> f64 {
        let j = j.clamp(0.0, 1.0);
        match self.shape {
            PreferenceShape::Affine => self.gamma_max * j - 0.5 * (self.gamma_max - self.gamma_min) * j * j,
            PreferenceShape::Power { .. } => integrate(|i| self.value(i), 0.0, j, 1e-12),
        }
    }

    /// Preference of the average household, γ̂ = ∫₀¹ γ(i) di.
    pub fn mean(&self) -> f64 {
        match self.shape {
            PreferenceShape::Affine => 0.5 * (self.gamma_max + self.gamma_min),
            PreferenceShape::Power { .. } => self.integral_to(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormShape {
    /// λ(r) = λ₀ + (λ∞ − λ₀)·r/(1 + r)
    Saturating,
    /// λ(r) = λ₀ + (λ∞ − λ₀)·(1 − e^{−rate·r})
    Exponential { rate: f64 },
}

/// Social-norm multiplier on the green preference, increasing in last
/// period's green-to-brown consumption ratio and bounded by λ(∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialNormCurve {
    lambda_0: f64,
    lambda_inf: f64,
    shape: NormShape,
}

impl SocialNormCurve {
    pub fn saturating(lambda_0: f64, lambda_inf: f64) -> Result<Self, FormsError> {
        Self::new(lambda_0, lambda_inf, NormShape::Saturating)
    }

    pub fn new(lambda_0: f64, lambda_inf: f64, shape: NormShape) -> Result<Self, FormsError> {
        if !(lambda_0.is_finite() && lambda_inf.is_finite() && lambda_0 > 0.0 && lambda_inf > lambda_0) {
            return Err(FormsError::LambdaNotIncreasing { lambda_0, lambda_inf });
        }
        if let NormShape::Exponential { rate } = shape {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(FormsError::BadShape { name: "lambda rate", value: rate });
            }
        }
        let curve = Self { lambda_0, lambda_inf, shape };
        let mut prev = 0.0;
        for r in linspace(0.0, 50.0, 1001) {
            let v = curve.value(Ratio::Finite(r));
            if !(v > 0.0 && v >= prev && v <= lambda_inf) {
                return Err(FormsError::InvariantViolated { curve: "lambda", at: r });
            }
            prev = v;
        }
        Ok(curve)
    }

    pub fn lambda_0(&self) -> f64 {
        self.lambda_0
    }

    pub fn lambda_inf(&self) -> f64 {
        self.lambda_inf
    }

    pub fn shape(&self) -> NormShape {
        self.shape
    }

    pub fn eval(&self, r: Ratio) -> Result<f64, FormsError> {
        match r {
            Ratio::Finite(x) if !(x >= 0.0) => Err(FormsError::NegativeRatio(x)),
            _ => Ok(self.value(r)),
        }
    }

    /// λ(r) without the domain check; negative ratios are treated as 0.
    pub fn value(&self, r: Ratio) -> f64 {
        let r = match r {
            Ratio::Infinite => return self.lambda_inf,
            Ratio::Finite(x) if x.is_infinite() => return self.lambda_inf,
            Ratio::Finite(x) => x.max(0.0),
        };
        let span = self.lambda_inf - self.lambda_0;
        let v = match self.shape {
            NormShape::Saturating => self.lambda_0 + span * (r / (1.0 + r)),
            NormShape::Exponential { rate } => self.lambda_0 + span * (-(-rate * r).exp_m1()),
        };
        // Rounding can overshoot the limit by an ulp near saturation.
        v.min(self.lambda_inf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DamageShape {
    /// μ(B, H) = exp(−δ_B·B + δ_H·H)
    Exponential,
    /// μ(B, H) = (1 + δ_H·H) / (1 + δ_B·B)
    Rational,
}

/// Labor productivity as a function of last period's brown output and
/// healthcare provision, normalized so that μ(0, 0) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamageCurve {
    delta_b: f64,
    delta_h: f64,
    shape: DamageShape,
}

/// Partial elasticities ε_B = (B/μ)∂μ/∂B and ε_H = (H/μ)∂μ/∂H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elasticities {
    pub brown: f64,
    pub health: f64,
}

/// Outcome of checking ε_H < |ε_B| along the balanced-budget path H = τB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityReport {
    pub holds: bool,
    /// Smallest |ε_B| − ε_H over the checked grid (0 when vacuous).
    pub worst_margin: f64,
    /// Brown output where the smallest margin occurred.
    pub worst_b: f64,
    /// First brown output violating the assumption, if any.
    pub violating_b: Option<f64>,
    /// Both elasticities vanish identically on the path (no damage at all).
    pub vacuous: bool,
}

impl DamageCurve {
    pub fn exponential(delta_b: f64, delta_h: f64) -> Result<Self, FormsError> {
        Self::new(delta_b, delta_h, DamageShape::Exponential)
    }

    /// μ ≡ 1.
    pub fn none() -> Self {
        Self { delta_b: 0.0, delta_h: 0.0, shape: DamageShape::Exponential }
    }

    pub fn new(delta_b: f64, delta_h: f64, shape: DamageShape) -> Result<Self, FormsError> {
        if !(delta_b.is_finite() && delta_h.is_finite() && delta_b >= 0.0 && delta_h >= 0.0) {
            return Err(FormsError::NegativeDamage { delta_b, delta_h });
        }
        Ok(Self { delta_b, delta_h, shape })
    }

    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }

    pub fn delta_h(&self) -> f64 {
        self.delta_h
    }

    pub fn shape(&self) -> DamageShape {
        self.shape
    }

    pub fn eval(&self, b: f64, h: f64) -> Result<f64, FormsError> {
        if !(b >= 0.0 && h >= 0.0) {
            return Err(FormsError::NegativeDamageInput { b, h });
        }
        Ok(self.value(b, h))
    }

    pub fn value(&self, b: f64, h: f64) -> f64 {
        match self.shape {
            DamageShape::Exponential => (-self.delta_b * b + self.delta_h * h).exp(),
            DamageShape::Rational => (1.0 + self.delta_h * h) / (1.0 + self.delta_b * b),
        }
    }

    /// μ along the balanced-budget path H = τB.
    pub fn on_path(&self, b: f64, tau: f64) -> f64 {
        self.value(b, tau * b)
    }

    pub fn elasticities(&self, b: f64, h: f64) -> Elasticities {
        match self.shape {
            DamageShape::Exponential => Elasticities { brown: -self.delta_b * b, health: self.delta_h * h },
            DamageShape::Rational => Elasticities {
                brown: -self.delta_b * b / (1.0 + self.delta_b * b),
                health: self.delta_h * h / (1.0 + self.delta_h * h),
            },
        }
    }

    /// Checks ε_H < |ε_B| on H = τB for B on a 1001-point grid over
    /// `[b_lo, b_hi]`. Elasticities vanish at B = 0, so only B > 0 counts.
    pub fn elasticity_check(&self, tau: f64, b_lo: f64, b_hi: f64) -> ElasticityReport {
        let mut report = ElasticityReport {
            holds: true,
            worst_margin: f64::INFINITY,
            worst_b: b_lo,
            violating_b: None,
            vacuous: true,
        };
        for b in linspace(b_lo.max(0.0), b_hi.max(0.0), 1001) {
            if b <= 0.0 {
                continue;
            }
            let e = self.elasticities(b, tau * b);
            if e.brown != 0.0 || e.health != 0.0 {
                report.vacuous = false;
            }
            let margin = e.brown.abs() - e.health;
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_b = b;
            }
            if !(e.health < e.brown.abs()) && report.violating_b.is_none() {
                report.violating_b = Some(b);
            }
        }
        if report.vacuous {
            report.worst_margin = 0.0;
            report.violating_b = None;
        } else {
            report.holds = report.violating_b.is_none();
        }
        report
    }
}

/// Central-difference elasticities, for curves without a trusted closed
/// form and for cross-checking the ones that have one.
pub fn numeric_elasticities(curve: &DamageCurve, b: f64, h: f64) -> Elasticities {
    let mu = curve.value(b, h);
    let hb = 1e-6 * b.abs().max(1.0);
    let hh = 1e-6 * h.abs().max(1.0);
    let d_b = (curve.value(b + hb, h) - curve.value(b - hb, h)) / (2.0 * hb);
    let d_h = (curve.value(b, h + hh) - curve.value(b, h - hh)) / (2.0 * hh);
    Elasticities { brown: b / mu * d_b, health: h / mu * d_h }
}

/// The (γ, λ, μ) triple defining preferences and damage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalForms {
    pub gamma: PreferenceCurve,
    pub lambda: SocialNormCurve,
    pub mu: DamageCurve,
}
