//! Exact-arithmetic linear and homological algebra for filtered
//! (phi,N)-modules over a p-adic field, p-adic Hodge complexes, and the
//! explicit complexes computing their extension groups, including syntomic
//! cohomology with its long exact sequences, Leray spectral sequence and the
//! smooth-case splitting.
//!
//! Coefficients are exact global models of the p-adic fields (rationals,
//! an unramified quadratic layer, Eisenstein extensions), so every rank and
//! kernel below is computed without any precision management.

pub mod rat;
pub mod tower;
pub mod field;
pub mod mat;
pub mod complex;
pub mod spectral;
pub mod module;
pub mod mfcx;
pub mod phodge;
pub mod syntomic;
pub mod builtin;
pub mod doc;
pub mod selftest;
