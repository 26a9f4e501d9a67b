//! Finite extended quasi-metric spaces and Möbius-invariant tooling.

pub mod qspace;
pub mod crossratio;
pub mod generators;
pub mod hausdorff;
pub mod nagata;
