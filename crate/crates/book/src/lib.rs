//! The guide under `book/` compiled as doc-tests, one module per chapter, so
//! `cargo test` runs every snippet the book shows.

#[doc = include_str!("../../../book/src/intro.md")]
mod intro {}
#[doc = include_str!("../../../book/src/frames.md")]
mod frames {}
#[doc = include_str!("../../../book/src/eskf.md")]
mod eskf {}
#[doc = include_str!("../../../book/src/simulation.md")]
mod simulation {}
#[doc = include_str!("../../../book/src/markers.md")]
mod markers {}
#[doc = include_str!("../../../book/src/hybrid.md")]
mod hybrid {}
#[doc = include_str!("../../../book/src/evaluation.md")]
mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
