//! Sharp bounds for distortion risk measures over laws with a given mean and
//! variance, optionally constrained to be symmetric and/or unimodal.
//!
//! A risk measure is `ρ_h[X] = ∫₀¹ F⁻¹(p) dh̃(p)` with `h̃(p) = 1 − h(1 − p)`.
//! [`drm_bounds::bound`] returns the supremum or infimum of `ρ_h` over a
//! [`ShapeClass`] together with an extremal law when one exists, and
//! [`oracle::search`] checks such results by brute force.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distortion;
pub mod drm_bounds;
pub mod error;
pub mod exec;
pub mod measure;
pub mod optimize;
pub mod oracle;
pub mod pwl;
pub mod quadrature;
pub mod quantile;
pub mod sweep;
pub mod var_bounds;

pub use distortion::{Classification, Continuity, DistortionFunction, JumpSide, Kind, Side, Step};

pub use drm_bounds::{bound, BoundResult, BoundSide, BracketDetail, Branch, Method, Options};
pub use error::{Error, Result};
pub use exec::Execution;
pub use measure::{Atom, Density, DensityPiece, DerivativeMeasure, Inverse};
pub use quantile::{
    rho, tail_bound, tail_extremal, validate_shape, MomentSpec, QuantileFunction, Segment,
    ShapeClass,
};
pub use var_bounds::{var_bound, VarKind};

