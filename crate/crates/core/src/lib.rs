//! Exact verification of Drinfel'd doubles and their quantum deformations.

pub mod catalog;
pub mod hopf;
pub mod liealg;
pub mod linalg;
pub mod ncpoly;
pub mod report;
pub mod scalars;
pub mod suite;
pub mod syntax;
