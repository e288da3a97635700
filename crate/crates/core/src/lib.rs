//! Exact computations around Weil algebras, their noncommutative
//! counterparts, the quantization map and the super Duflo theorem.

pub mod algebra;
pub mod diagrams;
pub mod duflo;
pub mod expr;
pub mod gdiff;
pub mod liealg;
pub mod linalg;
pub mod ncweil;
pub mod rational;
pub mod spinfact;
pub mod weil;
