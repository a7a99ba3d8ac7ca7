//! Graph calculus of the noncommutative φ⁴ model on Moyal space.

pub mod dimreg;
pub mod direct;
pub mod exact;
pub mod moyal;
pub mod parametric;
pub mod quad;
pub mod ribbon;
