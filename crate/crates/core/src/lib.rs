//! Numerical toolkit for a two-player attack/peace game in which a
//! government attack can draw in a foreign intervener.
//!
//! - [`functions`]: the clamped monotone families `Z` (government win
//!   probability) and `W` (material intervention probability).
//! - [`game`]: parameters, assumption checks, the payoff table, the
//!   tolerance gap `D` and its derivative.
//! - [`equilibrium`]: best responses, pure Nash equilibria, `phi_bar`,
//!   `g_hat(phi)` and regime labels.
//! - [`verification`]: grid verification of the equilibrium characterization.
//! - [`sweep`]: `(g, phi)` phase-diagram grids.
//! - [`mc`]: seeded Monte Carlo of the resource and intervention draws.

pub mod equilibrium;
pub mod error;
pub mod functions;
pub mod game;
pub mod mc;
pub mod sweep;
pub mod verification;

pub use error::{Error, Result, Violation};
pub use functions::{Curve, MonotoneFunction, PowerFamilyW, PowerFamilyZ, Tabulated};
pub use game::{Action, ActionProfile, Model, ModelParams};
