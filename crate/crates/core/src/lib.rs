//! Householder-based synthesis of quantum circuits for sparse states,
//! isometries and unitaries, with a CNOT cost model and an exact simulator
//! for verification.

pub mod gates;
pub mod cli;
pub mod costs;
pub mod householder;
pub mod methods;
pub mod numerics;
pub mod ordering;
pub mod pivoting;
pub mod random;
