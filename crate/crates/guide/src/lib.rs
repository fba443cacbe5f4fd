//! The chapters of the guide in `book/src`, compiled so that every `rust`
//! block runs as a doc-test against the current API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}

#[doc = include_str!("../../../book/src/littlewood-paley.md")]
pub mod littlewood_paley {}

#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}

#[doc = include_str!("../../../book/src/large-data.md")]
pub mod large_data {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/conditions.md")]
pub mod conditions {}

#[doc = include_str!("../../../book/src/inequalities.md")]
pub mod inequalities {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
