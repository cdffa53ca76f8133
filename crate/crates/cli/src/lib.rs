//! Command-line front end for the `fraclap` library: constant tables, kernel
//! evaluation grids, Dirichlet solves and the identity battery as CSV or JSON.

pub mod commands;
pub mod config;
pub mod table;
