//! Benchmark generators, parameter sweeps and the command-line front end.

pub mod cli;
pub mod lasso;
pub mod mpc;
pub mod rng;
pub mod sweep;
