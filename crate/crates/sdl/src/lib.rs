//! File formats, scenario runner and command-line front end for `sdl-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod scenario;

pub use error::{Result, SdlError};
