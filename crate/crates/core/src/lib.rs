//! Relative differential geometry of surfaces in three-space.
//!
//! Charts deliver exact high-order jets through truncated Taylor arithmetic.
//! On top of them sit the Euclidean invariants, the geometry of the second
//! fundamental form as a metric, relative normals of curvature-dependent
//! type, their shape operators and first-variation densities, and
//! convergent surface quadrature for closed-surface integral identities.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting guard; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::suspicious_arithmetic_impl)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod relative;
pub mod surface;
pub mod taylor;
pub mod variational;

pub use error::{GeomError, Result};
pub use surface::{builtin_surface, Jet, SurfaceDescriptor, SurfacePatch};
pub use taylor::Taylor;
