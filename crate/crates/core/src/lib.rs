//! Exact cusp counts for Picard modular surfaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`quadfield`]: imaginary quadratic fields, exact element arithmetic,
//!   prime splitting.
//! - [`ideals`]: fractional ideals in canonical scaled-HNF form and the
//!   bridge to binary quadratic forms.
//! - [`classgroup`]: reduced forms, Gauss composition, group structure and
//!   torsion orders.
//! - [`hermitian_lines`]: the form `h0`, isotropic lines and their ideal
//!   classes, sample elements of the integral unitary group, and the mod-p
//!   orbit oracle in [`hermitian_lines::modp`].
//! - [`cusp_formulas`]: closed-form cusp counts over validated level data.
//! - [`catalog`]: discriminant scans, growth reports and the scan cache.
//! - [`cli`]: the `picard` command line front end.

pub mod arith;
pub mod catalog;
pub mod classgroup;
pub mod cli;
pub mod cusp_formulas;
pub mod error;
pub mod hermitian_lines;
pub mod ideals;
pub mod quadfield;

pub use error::{Error, Result};
