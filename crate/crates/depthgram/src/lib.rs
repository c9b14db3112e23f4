//! Depth-based outlier detection for high-dimensional functional data.
//!
//! A dataset here is `n` observed curves, each recorded in `p` dimensions on a
//! shared grid of `N` points — with `p` possibly in the tens of thousands,
//! far exceeding `n`. The crate condenses such a dataset into three
//! two-dimensional *DepthGram* scatter plots (one point per observation) from
//! which magnitude, shape, and joint outliers can be read off, and implements
//! the companion outlier-flagging rules.
//!
//! The pipeline is built for the `p >> n` regime: dimensions stream through a
//! single pass with bounded memory, the hot counting kernels work on exact
//! integer accumulators so results are reproducible bit-for-bit regardless of
//! worker count, and a brute-force reference implementation of every
//! computation is kept alongside for validation.
//!
//! Module map:
//!
//! * [`depth`] — modified band depth / epigraph index kernels and oracles.
//! * [`engine`] — the streaming pass producing DepthGrams and outlier flags.
//! * [`marginal`] — per-dimension functional boxplot and outliergram screens.
//! * [`synth`] — reproducible simulation models for benchmarking the method.
//! * [`hdfd`] — the binary dataset format and CSV import.
//! * [`report`] — JSON/CSV serialization of analysis results.
//! * [`plot`] — SVG rendering of DepthGram scatters.
//! * [`reference`] — slow recomputation paths used to cross-check the engine.

pub mod depth;
pub mod engine;
pub mod error;
pub mod hdfd;
pub mod marginal;
pub mod plot;
pub mod reference;
pub mod report;
pub mod synth;

pub mod book;

pub use error::Error;
