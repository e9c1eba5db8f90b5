//! Exact and asymptotic Bergman densities on model Kähler manifolds with circle actions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod charsum;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod logreal;
pub mod quad;
pub mod randzeros;
pub mod spectra;

pub use error::{Error, Result};
pub use geometry::{GeometryKind, LevelData, ModelGeometry, Point, RhoOrder};
pub use logreal::LogReal;
