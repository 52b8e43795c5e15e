//! The guide's code blocks, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/instances.md")]
pub mod instances {}
#[doc = include_str!("../../../book/src/waterfill.md")]
pub mod waterfill {}
#[doc = include_str!("../../../book/src/algorithms.md")]
pub mod algorithms {}
#[doc = include_str!("../../../book/src/rounding.md")]
pub mod rounding {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/lower-bounds.md")]
pub mod lower_bounds {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
