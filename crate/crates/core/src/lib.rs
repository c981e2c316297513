//! Geodesics, Jacobi fields and conjugate loci on compact Liouville manifolds.
//!
//! The manifolds are built from a spectrum `a_0 > … > a_n > 0` and a positive
//! profile `A(λ)`; `A = √λ` gives the triaxial ellipsoid and `A ≡ c` the round
//! sphere. The crate integrates the geodesic and variational flows in separated
//! coordinates, locates conjugate points, and classifies the singularities of
//! the conjugate loci.

pub mod conjugate;
pub mod dual;
pub mod error;
pub mod geodesic;
pub mod integrals;
pub mod manifold;
pub mod poly;
pub mod quadrature;
pub mod suite;

pub use error::{Error, Result};
