//! Finite metric space constructions with machine-checked certificates.
//!
//! The crate builds three layered metrics over a finite ambient space with a
//! marked Cantor-type subset:
//!
//! 1. a partition metric on the subset whose blocks are scaled copies of a
//!    seed metric and whose cross-block distances are sup-distances
//!    ([`cantor`]);
//! 2. a glued metric on the carved-out set `C` that reproduces the partition
//!    metric, keeps the ambient metric far from the subset, and separates the
//!    two parts ([`glue`]);
//! 3. an extension of the glued metric back to the whole space through a
//!    ball cover, a partition of unity, and Lipschitz-free norms computed by
//!    min-cost transportation ([`extend`], [`free`]).
//!
//! Every quantitative promise is re-measured after construction and recorded
//! in a [`report::CertificateReport`]; [`pipeline`] chains the stages, and
//! the `lipfree` binary drives it from the command line.
//!
//! All numeric code is generic over [`scalar::Scalar`] (any IEEE float);
//! the aliases below fix the canonical `f64` instantiation.

#![forbid(unsafe_code)]

pub mod cantor;
pub mod error;
pub mod extend;
pub mod free;
pub mod glue;
pub mod io;
pub mod metric;
pub mod pipeline;
pub mod report;
pub mod scalar;
mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Canonical `f64` instantiations.
pub type Space = metric::FiniteMetricSpace<f64>;
pub type Matrix = metric::SquareMatrix<f64>;
pub type Validation = metric::ValidationReport<f64>;
pub type Function = metric::LipschitzFunction<f64>;
pub type Measure = free::SignedMeasure<f64>;
pub type Plan = free::TransportPlan<f64>;
pub type Cantor = cantor::CantorModel<f64>;
pub type PartitionMetric = cantor::PartitionedCantorMetric<f64>;
pub type Glued = glue::GluedMetric<f64>;
pub type Cover = extend::DugundjiSystem<f64>;
pub type Extension = extend::ExtensionResult<f64>;
pub type Report = report::CertificateReport<f64>;
pub type Config = pipeline::PipelineConfig<f64>;

/// Single-precision aliases for the lighter instantiation.
pub type Space32 = metric::FiniteMetricSpace<f32>;
pub type Measure32 = free::SignedMeasure<f32>;
