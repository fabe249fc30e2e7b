//! Every listing in `book/src` runs as a doc-test of this crate, one module
//! per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/scalars.md")]
pub mod scalars {}
#[doc = include_str!("../../../book/src/shanks.md")]
pub mod shanks_transformation {}
#[doc = include_str!("../../../book/src/epsilon.md")]
pub mod epsilon {}
#[doc = include_str!("../../../book/src/multistep.md")]
pub mod multistep {}
#[doc = include_str!("../../../book/src/identities.md")]
pub mod identities {}
#[doc = include_str!("../../../book/src/lotka-volterra.md")]
pub mod lotka_volterra {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
