//! Numerical laboratory for the short-time dynamics of a bosonic mode coupled
//! to a bosonic or magnetic environment.
//!
//! The crate is organised bottom-up:
//!
//! * [`gaussian`] — single-mode Gaussian states as first and second moments.
//! * [`two_mode`] — exact propagator coefficients of the collective
//!   exchange/hopping models.
//! * [`reduced`] — the exact reduced map and its short-time Gaussian-noise form.
//! * [`gn_channel`] — the Gaussian-noise channel, closed form and Kraus sampling.
//! * [`stochastic`] — Ornstein–Uhlenbeck classical fields driving the mode.
//! * [`spin`] — Brillouin thermodynamics and the bosonized spin environment.
//! * [`fock`] — brute-force truncated-Fock ground truth.
//! * [`large_n`] — finite-N checks of the global-operator algebra and its
//!   coherent states.
//!
//! Units: ħ = k_B = 1 throughout. The vacuum quadrature covariance is
//! `diag(1/4, 1/4)` with `q = (a + a†)/2`, `p = (a − a†)/(2i)`.

pub mod error;
pub mod fit;
pub mod fock;
pub mod gaussian;
pub mod gn_channel;
pub mod large_n;
pub mod reduced;
pub mod rng;
pub mod spin;
pub mod stochastic;
pub mod two_mode;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, OccupationSource, ThermalOccupation};
pub use gn_channel::GnChannel;
pub use num_complex::Complex64;
pub use two_mode::{CoefficientSet, ModelKind, TwoModeParams};
