//! Exact-arithmetic solvers for general scheduling with step cost functions
//! and its covering counterpart, UFP-cover on a path.

pub mod error;
pub mod fewclass;
pub mod lp;
pub mod model;
pub mod oracles;
pub mod par;
pub mod rational;
pub mod reduction;
pub mod speedup;
pub mod ufp_qptas;
pub mod workbench;

pub use error::{Error, Result};
pub use rational::Rat;
