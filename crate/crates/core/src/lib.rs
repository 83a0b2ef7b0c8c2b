pub mod ba;
pub mod config;
pub mod continuation;
pub mod error;
pub mod numeric;
pub mod operator;
pub mod poly;
pub mod quasi_invariance;
pub mod rational;
pub mod sampling;
pub mod series;

pub use error::{Error, Result};
pub use poly::{IVec, LinForm, Monomial, QuasiPoly, XExpPoly, ZPoly, ZRatFunc};
pub use rational::Rat;
