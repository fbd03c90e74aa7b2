//! Exhaustive simulation of Petri nets with reset, inhibitor and read arcs,
//! plus generation of equivalent answer-set programs.

pub mod analysis;
pub mod asp;
pub mod cli;
pub mod engine;
pub mod io;
pub mod model;
