//! Generators, instance files and batch experiments.

pub mod experiment;
pub mod generate;
pub mod io;
