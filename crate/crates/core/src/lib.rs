//! Coordinate-level geometry of N-anholonomic manifolds.
//!
//! The crate is organised bottom-up:
//! - [`expr`]: symbolic scalar functions of chart coordinates;
//! - [`geometry`]: N-connections, d-metrics, the canonical d-connection and its torsion and curvature;
//! - [`lagrange`]: the geometric tower of a regular Lagrangian;
//! - [`clifford`]: gamma matrices, spin d-connections and a lattice Dirac operator;
//! - [`cech`]: cover and cochain combinatorics and the spin obstruction;
//! - [`chern`]: curvature forms, Chern forms and their integrals;
//! - [`cli`]: configuration, task execution and JSON reports;
//! - [`oracle`] and [`fuzz`]: finite-difference oracles and seeded test data.

// Tensor code indexes several arrays by the same component index.
#![allow(clippy::needless_range_loop)]

pub mod cech;
pub mod chern;
pub mod cli;
pub mod clifford;
pub mod expr;
pub mod fuzz;
pub mod geometry;
pub mod lagrange;
pub mod oracle;
