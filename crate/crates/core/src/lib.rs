//! Exact computations for extended affine Weyl groups, their Hecke algebras,
//! Abe-type categories of Soergel bimodules in positive characteristic, and
//! the multiplicative coinvariant algebras on the torus side.

pub mod abe;
pub mod decompose;
pub mod error;
pub mod field;
pub mod hecke;
pub mod linalg;
pub mod multside;
pub mod poly;
pub mod report;
pub mod suites;
pub mod weyl;

pub use error::{Error, Result};
pub use field::{CoeffField, Field, PrimeField, Rationals};
pub use weyl::{build_root_datum, AffineWeyl, AffineWeylElement, FiniteWeylElement, RootDatum};
pub use abe::FlaggedObject;
pub use decompose::{LklEngine, LklTable, TiltingTable};
pub use hecke::{Hecke, HeckeElement, LaurentPoly};
pub use poly::Realization;
pub use report::{CheckRecord, Report};
