//! Reconstruction of parametrized quantum states from tomographic snapshots
//! at randomly sampled parameter values, with compressed sensing over bounded
//! orthonormal function bases.

pub mod error;
pub mod util;
pub mod linalg;
pub mod pauli;
pub mod random;
pub mod basis;
pub mod qsim;
pub mod norms;
pub mod tomo;
pub mod solvers;
pub mod recovery;
pub mod support_id;
pub mod predict;
pub mod channels;
pub mod io;
pub mod audit;

pub use error::{Error, Result};
