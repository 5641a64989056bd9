//! L^p projection and centroid bodies in dimensions 2 and 3.
//!
//! Bodies expose support, radial and gauge evaluation; the operators
//! `Π_p`, `Γ_p`, polarity and continuous Steiner symmetrization are built on
//! top of those, and [`verifier`] turns the inequalities satisfied by these
//! operators into numerical pass/fail checks.

pub mod bodies;
pub mod error;
pub mod io;
pub mod lp_transforms;
pub mod numerics;
pub mod quadrature;
pub mod steiner;
pub mod verifier;

pub use error::{Error, Result};

/// Points and directions; planar bodies use the first two coordinates and keep `z = 0`.
pub type V3 = nalgebra::Vector3<f64>;
/// Points of the base `K|ξ⊥` in frame coordinates; the second coordinate is unused for n = 2.
pub type V2 = nalgebra::Vector2<f64>;
pub type M3 = nalgebra::Matrix3<f64>;
