//! Bloch varieties of periodic operators on flat tori: magnetic Schrödinger
//! operators with Aharonov–Bohm fluxes, two-dimensional Dirac operators and
//! the Weierstrass representation of the surfaces their zero modes define.

// `!(x <= bound)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirac;
pub mod numerics;
pub mod schrodinger;
pub mod torus;
pub mod weierstrass;

/// Version of the sign, normalisation and unit conventions used in
/// reported quantities. Bumped whenever any of them changes.
pub const CONVENTIONS_VERSION: &str = "1";
