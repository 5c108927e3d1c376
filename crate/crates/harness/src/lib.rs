//! Scenario files, run directories, sweeps and plots around the
//! `stigmergy` simulator. The `stigmergy` binary is a thin layer over
//! [`scenarios::run`] and [`sweep::run_sweep`].

pub mod config;
pub mod construction;
pub mod output;
pub mod plot;
pub mod scenarios;
pub mod sweep;
pub mod trapsim;
