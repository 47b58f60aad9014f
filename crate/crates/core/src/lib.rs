//! Surrogate classifiers for the contact state between 2D polygonal blocks.
//!
//! An exact geometric classifier ([`geometry`]) labels block pairs as
//! no-contact, vertex-vertex, vertex-edge or edge-edge. Two learned
//! surrogates approximate it: a TSK neuro-fuzzy system ([`anfis`]) whose
//! rules come from subtractive clustering ([`subclust`]), and a labeled
//! Kohonen map ([`som`]). [`pipeline`] generates kinematic scenes, builds
//! datasets, evaluates classifiers and fuses both surrogates over randomly
//! placed windows. [`experiment`] chains these steps into seeded,
//! reproducible runs and [`cli`] exposes them as a command line tool.

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anfis;
pub mod cli;
pub mod experiment;
pub mod geometry;
pub mod pipeline;
pub mod scaling;
pub mod som;
pub mod subclust;

pub use anfis::{GaussianMf, TskModel, TskRule};
pub use geometry::{classify_contact, min_separation, polygon_area, Block, ContactState, Point};
pub use som::{SomGrid, SomSchedule};
pub use subclust::SubclustParams;
