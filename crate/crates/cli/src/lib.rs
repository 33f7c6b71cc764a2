//! Pipeline driver, task templates, benchmark campaigns, and file formats
//! shared by the `stlplan` binary and the test suite.

pub mod batch;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod svg;
pub mod templates;
