//! Green/brown consumption dynamics with social-norm preferences.
//!
//! Households choose between two perfectly substitutable goods. Each has a
//! fixed intrinsic taste for the green good, amplified by a social norm that
//! strengthens as green consumption spreads. Brown output damages labor
//! productivity; a sales tax on brown purchases funds healthcare that
//! partially offsets the damage.
//!
//! The crate is organized bottom-up:
//!
//! * [`forms`]: the curve families γ(i), λ(r) and μ(B, H).
//! * [`dynamics`]: the share map ψ(j; τ), trajectories, fixed points,
//!   stability and basins.
//! * [`levels`]: per-period equilibrium quantities, the brown and green
//!   steady states, and their comparison.
//! * [`policy`]: threshold taxes, the minimal constant tax, temporary
//!   schedules and full policy simulation.
//! * [`scenario`], [`run`], [`emit`]: the scenario file, command dispatch
//!   and output formats behind the `green-transition` binary.
//!
//! ```
//! use green_transition::dynamics::{find_fixed_points, SolverConfig, Stability};
//! use green_transition::reference::ref1;
//!
//! let economy = ref1();
//! let fps = find_fixed_points(&economy, 0.0, &SolverConfig::default());
//! let kinds: Vec<Stability> = fps.iter().map(|f| f.kind).collect();
//! assert_eq!(kinds, [Stability::Stable, Stability::Unstable, Stability::Stable]);
//! ```

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod emit;
pub mod forms;
pub mod levels;
pub mod numeric;
pub mod policy;
pub mod reference;
pub mod run;
pub mod scenario;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/preferences.md")]
    mod preferences {}
    #[doc = include_str!("../../../book/src/share-map.md")]
    mod share_map {}
    #[doc = include_str!("../../../book/src/steady-states.md")]
    mod steady_states {}
    #[doc = include_str!("../../../book/src/policy.md")]
    mod policy {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
