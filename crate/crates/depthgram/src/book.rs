//! The guide chapters from `book/`, compiled into the API documentation.
//!
//! Each chapter is included verbatim, so every ```rust snippet in the book
//! runs as a doctest — the guide cannot drift from the library it
//! describes. Build the rendered book with `mdbook build book/`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/depth-measures.md")]
pub mod depth_measures {}

#[doc = include_str!("../../../book/src/depthgrams.md")]
pub mod depthgrams {}

#[doc = include_str!("../../../book/src/outlier-detection.md")]
pub mod outlier_detection {}

#[doc = include_str!("../../../book/src/simulation-models.md")]
pub mod simulation_models {}

#[doc = include_str!("../../../book/src/hdfd-format.md")]
pub mod hdfd_format {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
