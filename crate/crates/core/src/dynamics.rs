//! The green-share map ψ(j; τ) and its analysis: trajectories, fixed
//! points, local stability and basins of attraction.
//!
//! ψ sends this period's share of green households to next period's share.
//! It is continuous and nondecreasing in both `j` and `τ`, which is what
//! makes grid scans, one-sided probes and interval basins valid here.

use crate::forms::{FunctionalForms, Ratio};
use crate::numeric::{bisect, linspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("technology scales must be positive (a_g={a_g}, a_b={a_b})")]
    BadTechnology { a_g: f64, a_b: f64 },
    #[error("j={j} is not a fixed point (residual {residual:e})")]
    NotAFixedPoint { j: f64, residual: f64 },
}

/// Which expression feeds the social-norm argument G/B.
///
/// `Share` uses (j/(1−j))·(a_g/a_b), the ratio implied by the green share
/// alone. `Market` uses the ratio actually cleared when brown purchases are
/// taxed, (j/(1−j))·(a_g/a_b)·(1+τ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioConvention {
    #[default]
    Share,
    Market,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Economy {
    a_g: f64,
    a_b: f64,
    forms: FunctionalForms,
    ratio_convention: RatioConvention,
}

impl Economy {
    pub fn new(
        a_g: f64,
        a_b: f64,
        forms: FunctionalForms,
        ratio_convention: RatioConvention,
    ) -> Result<Self, DynamicsError> {
        if !(a_g.is_finite() && a_b.is_finite() && a_g > 0.0 && a_b > 0.0) {
            return Err(DynamicsError::BadTechnology { a_g, a_b });
        }
        Ok(Self { a_g, a_b, forms, ratio_convention })
    }

    pub fn a_g(&self) -> f64 {
        self.a_g
    }

    /// Brown technology scale; healthcare uses the same scale.
    pub fn a_b(&self) -> f64 {
        self.a_b
    }

    pub fn forms(&self) -> &FunctionalForms {
        &self.forms
    }

    pub fn ratio_convention(&self) -> RatioConvention {
        self.ratio_convention
    }

    pub fn with_convention(mut self, convention: RatioConvention) -> Self {
        self.ratio_convention = convention;
        self
    }

    /// a_b / ((1+τ)·a_g): the effective green price a household weighs its
    /// preference λγ(i) against.
    pub fn price_threshold(&self, tau: f64) -> f64 {
        self.a_b / ((1.0 + tau) * self.a_g)
    }

    /// Green-to-brown consumption ratio implied by share `j`.
    pub fn green_ratio(&self, j: f64, tau: f64) -> Ratio {
        if j >= 1.0 {
            return Ratio::Infinite;
        }
        if j <= 0.0 {
            return Ratio::Finite(0.0);
        }
        let base = j / (1.0 - j) * (self.a_g / self.a_b);
        match self.ratio_convention {
            RatioConvention::Share => Ratio::Finite(base),
            RatioConvention::Market => Ratio::Finite(base * (1.0 + tau)),
        }
    }

    /// Next period's green share given this period's share and tax.
    pub fn psi(&self, j: f64, tau: f64) -> f64 {
        debug_assert!(tau >= 0.0);
        let j = j.clamp(0.0, 1.0);
        let lambda = self.forms.lambda.value(self.green_ratio(j, tau));
        self.marginal_share(lambda, tau)
    }

    /// Share of households buying green when the norm multiplier is
    /// `lambda` and the tax is `tau`.
    pub fn marginal_share(&self, lambda: f64, tau: f64) -> f64 {
        let c = self.price_threshold(tau);
        let gamma = &self.forms.gamma;
        if lambda * gamma.gamma_max() <= c {
            0.0
        } else if lambda * gamma.gamma_min() >= c {
            1.0
        } else {
            gamma.inverse(c / lambda).unwrap_or(0.0)
        }
    }

    /// λ(0)γ(0) < a_b/((1+τ)a_g): nobody switches from an all-brown start.
    pub fn brown_trap_holds(&self, tau: f64) -> bool {
        self.forms.lambda.lambda_0() * self.forms.gamma.gamma_max() < self.price_threshold(tau)
    }

    /// λ(∞)γ(1) > a_b/((1+τ)a_g): the all-green state is self-sustaining.
    pub fn green_lock_in_holds(&self, tau: f64) -> bool {
        self.forms.lambda.lambda_inf() * self.forms.gamma.gamma_min() > self.price_threshold(tau)
    }

    /// Both steady states locally attracting.
    pub fn bistable(&self, tau: f64) -> bool {
        self.brown_trap_holds(tau) && self.green_lock_in_holds(tau)
    }
}

/// Numerical settings for fixed-point work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub grid_points: usize,
    pub fixed_point_tol: f64,
    pub probe_eps: f64,
    pub convergence_tol: f64,
    pub convergence_streak: usize,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points: 10_001,
            fixed_point_tol: 1e-10,
            probe_eps: 1e-6,
            convergence_tol: 1e-12,
            convergence_streak: 3,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    SemiStable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::SemiStable => "semi-stable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub j: f64,
    pub kind: Stability,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub shares: Vec<f64>,
    pub taus: Vec<f64>,
    pub converged_to: Option<FixedPoint>,
}

impl Trajectory {
    pub fn last(&self) -> f64 {
        *self.shares.last().expect("trajectory holds j_0")
    }
}

/// Rate in effect at period `t`; the last rate extends indefinitely.
pub(crate) fn rate_at(taus: &[f64], t: usize) -> f64 {
    match taus.get(t) {
        Some(&r) => r,
        None => taus.last().copied().unwrap_or(0.0),
    }
}

/// Iterates j_{t+1} = ψ(j_t; τ_t) for `horizon` steps.
pub fn iterate(economy: &Economy, j0: f64, taus: &[f64], horizon: usize, cfg: &SolverConfig) -> Trajectory {
    let mut shares = Vec::with_capacity(horizon + 1);
    let mut used = Vec::with_capacity(horizon);
    shares.push(j0.clamp(0.0, 1.0));
    let mut streak = 0;
    for t in 0..horizon {
        let tau = rate_at(taus, t);
        let j = shares[t];
        let next = economy.psi(j, tau);
        streak = if (next - j).abs() < cfg.convergence_tol { streak + 1 } else { 0 };
        used.push(tau);
        shares.push(next);
    }
    let final_tau = rate_at(taus, horizon.saturating_sub(1));
    let converged_to = if streak >= cfg.convergence_streak {
        match_fixed_point(economy, *shares.last().unwrap(), final_tau, cfg)
    } else {
        None
    };
    Trajectory { shares, taus: used, converged_to }
}

/// Iterates under a constant tax until the share settles or the iteration
/// cap is hit.
pub fn converge(economy: &Economy, j0: f64, tau: f64, cfg: &SolverConfig) -> Trajectory {
    let mut shares = vec![j0.clamp(0.0, 1.0)];
    let mut streak = 0;
    while shares.len() <= cfg.max_iterations {
        let j = *shares.last().unwrap();
        let next = economy.psi(j, tau);
        shares.push(next);
        streak = if (next - j).abs() < cfg.convergence_tol { streak + 1 } else { 0 };
        if streak >= cfg.convergence_streak {
            break;
        }
    }
    let taus = vec![tau; shares.len() - 1];
    let converged_to = if streak >= cfg.convergence_streak {
        match_fixed_point(economy, *shares.last().unwrap(), tau, cfg)
    } else {
        None
    };
    Trajectory { shares, taus, converged_to }
}

/// Final share after iterating a constant tax, without storing the path.
pub fn settle(economy: &Economy, j0: f64, tau: f64, cfg: &SolverConfig) -> (f64, bool) {
    let mut j = j0.clamp(0.0, 1.0);
    let mut streak = 0;
    for _ in 0..cfg.max_iterations {
        let next = economy.psi(j, tau);
        streak = if (next - j).abs() < cfg.convergence_tol { streak + 1 } else { 0 };
        j = next;
        if streak >= cfg.convergence_streak {
            return (j, true);
        }
    }
    (j, false)
}

pub(crate) fn match_fixed_point(economy: &Economy, limit: f64, tau: f64, cfg: &SolverConfig) -> Option<FixedPoint> {
    find_fixed_points(economy, tau, cfg)
        .into_iter()
        .filter(|fp| (fp.j - limit).abs() <= 1e-8)
        .min_by(|a, b| (a.j - limit).abs().total_cmp(&(b.j - limit).abs()))
}

/// All solutions of ψ(j; τ) = j in [0, 1], ascending.
///
/// Grid sign changes of ψ(j) − j are refined by bisection. Runs of grid
/// points where ψ(j) = j (plateaus) are reported by their two endpoints,
/// both marked semi-stable.
pub fn find_fixed_points(economy: &Economy, tau: f64, cfg: &SolverConfig) -> Vec<FixedPoint> {
    let n = cfg.grid_points.max(3);
    let grid: Vec<f64> = linspace(0.0, 1.0, n).collect();
    let gap: Vec<f64> = grid.iter().map(|&j| economy.psi(j, tau) - j).collect();
    let is_zero = |k: usize| gap[k].abs() <= cfg.fixed_point_tol;

    let mut out: Vec<FixedPoint> = Vec::new();
    let mut k = 0;
    while k < n {
        if is_zero(k) {
            let start = k;
            while k + 1 < n && is_zero(k + 1) {
                k += 1;
            }
            if start == k {
                let j = grid[k];
                let kind = probe(economy, j, tau, cfg);
                out.push(FixedPoint { j, kind, residual: gap[k].abs() });
            } else {
                for idx in [start, k] {
                    out.push(FixedPoint { j: grid[idx], kind: Stability::SemiStable, residual: gap[idx].abs() });
                }
            }
            k += 1;
            continue;
        }
        if k + 1 < n && !is_zero(k + 1) && gap[k] * gap[k + 1] < 0.0 {
            let f = |j: f64| economy.psi(j, tau) - j;
            if let Some(j) = bisect(grid[k], grid[k + 1], f, 1e-14, 200) {
                let kind = probe(economy, j, tau, cfg);
                out.push(FixedPoint { j, kind, residual: f(j).abs() });
            }
        }
        k += 1;
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Attract,
    Repel,
    Neutral,
}

fn probe(economy: &Economy, j: f64, tau: f64, cfg: &SolverConfig) -> Stability {
    let eps = cfg.probe_eps;
    let neutral = cfg.fixed_point_tol * 1e-3;
    let mut sides = Vec::with_capacity(2);
    if j - eps >= 0.0 {
        let below = j - eps;
        let d = economy.psi(below, tau) - below;
        sides.push(if d > neutral {
            Side::Attract
        } else if d < -neutral {
            Side::Repel
        } else {
            Side::Neutral
        });
    }
    if j + eps <= 1.0 {
        let above = j + eps;
        let d = economy.psi(above, tau) - above;
        sides.push(if d < -neutral {
            Side::Attract
        } else if d > neutral {
            Side::Repel
        } else {
            Side::Neutral
        });
    }
    if sides.iter().all(|&s| s == Side::Attract) {
        Stability::Stable
    } else if sides.iter().all(|&s| s == Side::Repel) {
        Stability::Unstable
    } else {
        Stability::SemiStable
    }
}

/// Stability of a fixed point from one-sided probes at j ± ε.
pub fn classify(economy: &Economy, j: f64, tau: f64, cfg: &SolverConfig) -> Result<Stability, DynamicsError> {
    let residual = (economy.psi(j, tau) - j).abs();
    if residual > cfg.fixed_point_tol {
        return Err(DynamicsError::NotAFixedPoint { j, residual });
    }
    Ok(probe(economy, j, tau, cfg))
}

/// Where points of a basin end up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "j")]
pub enum Limit {
    FixedPoint(f64),
    /// Every point of the interval is itself fixed (a plateau).
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Basin {
    pub lo: f64,
    pub hi: f64,
    pub includes_lo: bool,
    pub includes_hi: bool,
    pub limit: Limit,
}

impl Basin {
    pub fn contains(&self, j: f64) -> bool {
        let above = if self.includes_lo { j >= self.lo } else { j > self.lo };
        let below = if self.includes_hi { j <= self.hi } else { j < self.hi };
        above && below
    }
}

/// Partition of [0, 1] into intervals labeled by where the constant-tax
/// iteration converges.
pub fn basins(economy: &Economy, tau: f64, cfg: &SolverConfig) -> Vec<Basin> {
    let fps = find_fixed_points(economy, tau, cfg);
    basins_from(economy, tau, &fps, cfg)
}

pub fn basins_from(economy: &Economy, tau: f64, fps: &[FixedPoint], cfg: &SolverConfig) -> Vec<Basin> {
    let gap = |j: f64| economy.psi(j, tau) - j;
    let mut pieces: Vec<Basin> = Vec::new();
    let points: Vec<f64> = fps.iter().map(|f| f.j).collect();
    let direction = |lo: f64, hi: f64, down: Option<f64>, up: Option<f64>| {
        let d = gap(0.5 * (lo + hi));
        if d.abs() <= cfg.fixed_point_tol {
            Limit::Stationary
        } else if d > 0.0 {
            up.map(Limit::FixedPoint).unwrap_or(Limit::Stationary)
        } else {
            down.map(Limit::FixedPoint).unwrap_or(Limit::Stationary)
        }
    };

    if points.is_empty() {
        return vec![Basin { lo: 0.0, hi: 1.0, includes_lo: true, includes_hi: true, limit: Limit::Stationary }];
    }
    if points[0] > 0.0 {
        let limit = direction(0.0, points[0], None, Some(points[0]));
        pieces.push(Basin { lo: 0.0, hi: points[0], includes_lo: true, includes_hi: false, limit });
    }
    for (idx, &p) in points.iter().enumerate() {
        pieces.push(Basin { lo: p, hi: p, includes_lo: true, includes_hi: true, limit: Limit::FixedPoint(p) });
        if let Some(&next) = points.get(idx + 1) {
            if next > p {
                let limit = direction(p, next, Some(p), Some(next));
                pieces.push(Basin { lo: p, hi: next, includes_lo: false, includes_hi: false, limit });
            }
        }
    }
    let last = *points.last().unwrap();
    if last < 1.0 {
        let limit = direction(last, 1.0, Some(last), None);
        pieces.push(Basin { lo: last, hi: 1.0, includes_lo: false, includes_hi: true, limit });
    }

    let mut merged: Vec<Basin> = Vec::new();
    for piece in pieces {
        match merged.last_mut() {
            Some(prev)
                if prev.limit == piece.limit && prev.hi == piece.lo && (prev.includes_hi || piece.includes_lo) =>
            {
                prev.hi = piece.hi;
                prev.includes_hi = piece.includes_hi;
            }
            _ => merged.push(piece),
        }
    }
    merged
}
