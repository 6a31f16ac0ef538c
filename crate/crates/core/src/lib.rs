//! Spectral numerics for Krein-Feller operators on self-similar measures and Monte Carlo
//! simulation of the stochastic wave equation they drive.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64` or `f32`.

pub mod error;
pub mod geometry;
pub mod regularity;
pub mod scalar;
pub mod spde;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type IfsSpec64 = geometry::IfsSpec<f64>;
pub type Ifs64 = geometry::ValidatedIfs<f64>;
pub type ExponentSet64 = geometry::ExponentSet<f64>;
pub type DiscreteMeasure64 = geometry::DiscreteMeasure<f64>;
pub type StieltjesString64 = spectral::StieltjesString<f64>;
pub type EigenSystem64 = spectral::EigenSystem<f64>;
pub type PathEnsemble64 = spde::PathEnsemble<f64>;
pub type HoelderReport64 = regularity::HoelderReport<f64>;

pub type IfsSpec32 = geometry::IfsSpec<f32>;
pub type Ifs32 = geometry::ValidatedIfs<f32>;
pub type ExponentSet32 = geometry::ExponentSet<f32>;
pub type DiscreteMeasure32 = geometry::DiscreteMeasure<f32>;
pub type StieltjesString32 = spectral::StieltjesString<f32>;
pub type EigenSystem32 = spectral::EigenSystem<f32>;
pub type PathEnsemble32 = spde::PathEnsemble<f32>;
pub type HoelderReport32 = regularity::HoelderReport<f32>;
