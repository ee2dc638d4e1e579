//! Special functions and the contour-integral machinery behind the
//! closed-form capacity expressions.

pub mod accel;
pub mod gamma;
pub mod hyper;
pub mod meijer;
pub mod mellin;
pub mod quad;

pub use accel::{accelerate, Accelerated, Method as AccelMethod};
pub use gamma::{digamma, gamma, harmonic, ln_gamma, ln_gamma_c, EULER_GAMMA};
pub use hyper::{gen_exp_integral, kummer_m, kummer_u, ln_kummer_m};
pub use meijer::{egbmg, meijer_g, EgbmgSpec, MeijerGSpec};
pub use mellin::{ContourConfig, MbValue};
