#![allow(clippy::needless_range_loop)]

pub mod clifford;
pub mod conformal;
pub mod equations;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod solutions;
pub mod spincalc;
pub mod suites;
pub mod variation;
pub mod warped;

pub use error::{Error, Result};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;
