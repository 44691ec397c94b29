//! Exact arithmetic in `Q` and quadratic fields, local Hilbert symbols,
//! ray-class Artin labels and certificates for membership in the ring of
//! integers.

pub mod approx;
pub mod arith;
pub mod classfield;
mod conic;
pub mod definability;
pub mod enumerate;
pub mod error;
pub mod field;
pub mod ideal;
pub mod place;
pub mod prescription;
pub mod residue;
pub mod symbols;
pub mod trace;

pub use error::{Error, Result};
pub use field::{Field, FieldCtx, NfElem};
pub use place::{Place, PrimeIdeal};
pub use symbols::Sign;
