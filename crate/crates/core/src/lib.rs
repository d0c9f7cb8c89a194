//! Structure-free toolkit for systematic metal-organic framework names.
//!
//! Names are parsed into typed descriptors ([`nomenclature`]), embedded as unit
//! vectors ([`embedding`]), compared and projected ([`simspace`]), regressed
//! against properties ([`predict`]) and ranked for low predicted bandgaps
//! ([`screen`]). [`corpus`] handles the record and descriptor files.

pub mod embedding;
pub mod nomenclature;
pub mod rng;
pub mod simspace;
pub mod corpus;
pub mod predict;
pub mod screen;
pub mod synthetic;
