//! Street-canyon propagation toolkit for 28 GHz urban coverage studies.
//!
//! The crate bundles the pieces needed to go from raw path-gain and
//! angular-scan data to street-level coverage predictions:
//!
//! - [`propagation`]: slope-intercept and around-corner path-gain models
//!   with a catalog of named parameter presets, plus free-space reference
//!   and shadow-fading sampling.
//! - [`raytrace`]: incoherent image-method ray sum for a straight street
//!   canyon (two dielectric walls plus ground).
//! - [`angular`]: rotating-horn azimuth scans to omnidirectional path gain
//!   and effective directional gain, full-scattering gain simulation, and
//!   empirical CDFs with DKW confidence bands.
//! - [`fit`]: least-squares fitting of the propagation models to link
//!   records, with 90% confidence intervals and residual diagnostics.
//! - [`netsim`]: Manhattan-grid downlink simulation producing SNR/SINR and
//!   Shannon-rate distributions over street sample points.
//! - [`config`] and [`io`]: flat key-value configuration and the CSV
//!   formats shared by the CLI.

// Validation guards are written as negated comparisons (`!(x >= 1.0)`) so
// NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod config;
pub mod error;
pub mod fit;
pub mod io;
pub mod netsim;
pub mod propagation;
pub mod raytrace;

pub use error::{Error, Result};
