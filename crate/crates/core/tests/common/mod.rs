//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod cells;
pub mod dense;
pub mod extract;
pub mod fd;
pub mod fixtures;
pub mod stats;
