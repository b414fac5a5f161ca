//! Exact local orbital integrals, character sums and support lattices for a
//! relative trace formula over Q, plus a twisted L-value moment harness.

pub mod arith;
pub mod characters;
pub mod charspec;
pub mod cyclotomic;
pub mod error;
pub mod global;
pub mod grid;
pub mod lfunc;
pub mod orbital;
pub mod padic;
pub mod report;

pub use cyclotomic::CyclotomicSum;
pub use error::{Error, Result};
pub use padic::{Matrix2, ValuedRational, Valuation};
