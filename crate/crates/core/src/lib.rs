//! Construction, deformation and verification of holomorphic Legendrian
//! curves in `(C^(2n+1), dz + sum x_j dy_j)`.

pub mod contact;
pub mod error;
pub mod flat;
pub mod flows;
pub mod fourier;
pub mod geometry;
pub mod io;
pub mod period;
pub mod random;
pub mod rh;
pub mod series;

pub use contact::{ContactPoint, CurveJet, Domain, HolomorphicCurve};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::LaurentPoly;
