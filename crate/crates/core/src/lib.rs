//! Testing framework for multi-subroutine quantum programs.

// Qubit blocks are slices of ranges, and a single block is common.
#![allow(clippy::single_range_in_vec_init)]

pub mod detect;
pub mod harness;
pub mod io;
pub mod mutate;
pub mod partition;
pub mod program;
pub mod sim;
