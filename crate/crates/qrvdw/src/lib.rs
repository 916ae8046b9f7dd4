//! Quasi-resonant van der Waals interaction between an excited atom A and a
//! ground-state atom B.
//!
//! The interaction energy is available through three independent paths:
//! the closed form ([`closed_form`]), residue calculus over the frequency
//! integrals ([`contour`]) and principal-value quadrature ([`quadrature`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod cli;
pub mod closed_form;
pub mod contour;
pub mod error;
pub mod expo;
pub mod geometry;
pub mod quadrature;
pub mod scan;
pub mod spectral;
pub mod units;

pub use atom::{PairSystem, RegimeReport, TransitionLine};
pub use closed_form::{EnergyResult, Method};
pub use error::{Error, Result};
pub use geometry::{DipoleContractions, GeometryTensors, SeparationGeometry};
