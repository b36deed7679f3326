//! Numerical laboratory for orthogonal polynomials with the quartic double-well
//! weight e^{-N(t z²/2 + g z⁴/4)}: exact recurrence tables, semiclassical
//! approximations, correlation kernels and their mutual consistency checks.

pub mod numerics;
pub mod ortho;
pub mod freud;
pub mod semiclassics;
pub mod asympt;
pub mod kernels;
pub mod laxpair;
