//! Batch driver around `capillary-core`: experiment specs, reports,
//! refinement ladders, and OFF/OBJ mesh files.

pub mod experiment;
pub mod io;
pub mod report;
pub mod spec;
