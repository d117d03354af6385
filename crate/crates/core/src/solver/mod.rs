//! Numerical back ends: a small simplex, optimal-face projection and an interior-point
//! method for separable concave programs.

pub mod interior;
pub mod projection;
pub mod simplex;
