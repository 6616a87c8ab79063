#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anisotropy;
pub mod config;
pub mod convex;
pub mod diagnostics;
pub mod duality;
pub mod error;
pub mod flow;
pub mod io;
pub mod runner;
pub mod sphere;
pub mod verify;
