//! Ergodic capacity of the fluctuating double-Rayleigh with line-of-sight
//! (fdRLoS) fading channel.
//!
//! The crate is split into four layers:
//!
//! * [`specfun`]: gamma family, Kummer functions, Meijer G and its bivariate
//!   extension evaluated by Mellin–Barnes quadrature, series acceleration.
//! * [`channel`]: the channel model, its conditional and marginal SNR
//!   densities, and an exact sampler.
//! * [`capacity`]: ORA and OPRA capacities by quadrature, closed forms,
//!   ratio approximations and high-SNR asymptotics.
//! * [`mcsim`]: reproducible Monte-Carlo estimates used as an independent
//!   oracle.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod mcsim;
pub mod specfun;

pub use error::{NumError, Result};
