//! Planning core for timed reachability tasks specified in signal temporal
//! logic (STL).
//!
//! The pipeline implemented here takes an STL formula over named planar
//! predicates, rewrites it into disjunction-free normal form, decomposes each
//! disjunct into reachability/invariance progresses with integer time
//! variables, allocates timed waypoints with a dynamics-aware depth-first
//! search, stitches the waypoints into a full state signal, and monitors the
//! result with Boolean and quantitative STL semantics.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the
//! benchmark driver live in the companion `stlplan-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod allocation;
pub mod bounds;
pub mod decomp;
pub mod generation;
pub mod geom;
pub mod stl;
pub mod world;
