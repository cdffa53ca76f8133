pub mod constants;
pub mod error;
pub mod field;
pub mod geometry;
pub mod quadrature;
pub mod specfun;
pub mod kernels;
pub mod solver;
pub mod verify;
