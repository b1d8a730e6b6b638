//! Support code for the `annulus` command-line tool.

pub mod render;
