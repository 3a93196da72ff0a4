//! Measure how the representation of characters shifts between a source text
//! and the communities that retell it.
//!
//! The crate covers three families of measurements:
//!
//! * attention: alias-based mention counts and a chi-square test of
//!   independence between characters and sources ([`corpus`], [`stats`]);
//! * network position: weighted co-occurrence networks and five
//!   centrality/structure measures converted to ranks ([`charnet`],
//!   [`netmetrics`]);
//! * semantic association: skip-gram embeddings per source, orthogonal
//!   Procrustes alignment, and semantic-axis scoring ([`embed`], [`align`],
//!   [`axes`]), plus dependency-based description extraction with weighted
//!   log-odds selection ([`describe`], [`stats`]).
//!
//! [`pipeline`] strings the stages together and writes plot-ready CSV files.

pub mod align;
pub mod axes;
pub mod charnet;
pub mod corpus;
pub mod describe;
pub mod embed;
mod error;
pub mod fixtures;
pub mod linalg;
pub mod netmetrics;
pub mod pipeline;
pub mod ranks;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/mentions.md")]
    mod mentions {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/centrality.md")]
    mod centrality {}
    #[doc = include_str!("../../../book/src/coreness.md")]
    mod coreness {}
    #[doc = include_str!("../../../book/src/embeddings.md")]
    mod embeddings {}
    #[doc = include_str!("../../../book/src/alignment.md")]
    mod alignment {}
    #[doc = include_str!("../../../book/src/axes.md")]
    mod axes {}
    #[doc = include_str!("../../../book/src/descriptions.md")]
    mod descriptions {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
