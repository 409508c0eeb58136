//! Exact combinatorial K-stability for spherical cones.
//!
//! Everything is computed over the rationals: polyhedral cones by double
//! description, Duistermaat-Heckman integrals by triangulation and the
//! simplex monomial formula, and Reeb vector stationarity by Sturm root
//! isolation. Floating point only appears in the numeric Reeb solver
//! fallback, whose output is re-certified exactly.

pub mod catalog;
pub mod cones;
pub mod degeneration;
pub mod exactnum;
pub mod integrate;
pub mod kstability;
pub mod rootdata;
