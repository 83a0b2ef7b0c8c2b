//! Exact polynomial types in the spectral variables and exponential
//! polynomials in the spatial ones.

pub mod linform;
pub mod monomial;
pub mod quasi;
pub mod ratfunc;
mod serial;
pub mod xexp;
pub mod zpoly;

pub use linform::LinForm;
pub use monomial::{Monomial, MAX_VARS};
pub use quasi::{pairing, QuasiPoly};
pub use ratfunc::ZRatFunc;
pub use xexp::{xexp_divide, IVec, XExpPoly};
pub use zpoly::ZPoly;
