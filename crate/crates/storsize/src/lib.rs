//! File formats, table rendering and the command-line front end for
//! [`storsize_core`].

pub mod cli;
pub mod io;
pub mod json;
pub mod table;
