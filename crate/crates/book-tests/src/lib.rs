//! Compiles and runs every code block in the guide as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice {}

#[doc = include_str!("../../../book/src/spin-model.md")]
pub mod spin_model {}

#[doc = include_str!("../../../book/src/splittings.md")]
pub mod splittings {}

#[doc = include_str!("../../../book/src/gates.md")]
pub mod gates {}

#[doc = include_str!("../../../book/src/rhombus.md")]
pub mod rhombus {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
