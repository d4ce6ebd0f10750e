//! Hierarchical entropy-rate superpixel segmentation.
//!
//! The engine turns an image (or a precomputed 8-channel affinity map) into a
//! weighted 8-connected pixel graph, then runs Borůvka-style rounds in which
//! every tree selects the outgoing edge with the largest entropy-rate gain.
//! The order in which edges are added is recorded as a [`MergeHierarchy`], so
//! a segmentation with any number of superpixels can be cut from it without
//! touching the graph again.
//!
//! ```no_run
//! use hers_core::{affinity, graph::PixelGraph, hierarchy, image_io};
//!
//! let image = image_io::load_image("photo.png")?;
//! let params = affinity::auto_sigma(&image);
//! let map = affinity::gaussian_affinity(&image, params);
//! let graph = PixelGraph::from_affinity(&map)?;
//! let hierarchy = hierarchy::build_hierarchy(&graph)?;
//! let labels = hierarchy.extract(200, image.height(), image.width())?;
//! assert_eq!(labels.k(), 200);
//! # Ok::<(), hers_core::Error>(())
//! ```
//!
//! A lazy-greedy solver over the same objective lives in [`baseline`] and the
//! usual superpixel quality measures in [`metrics`].

pub mod affinity;
pub mod baseline;
pub mod disjoint_set;
mod error;
pub mod exec;
pub mod graph;
pub mod hierarchy;
pub mod image_io;
pub mod metrics;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{EdgeGain, PixelGraph};
pub use hierarchy::MergeHierarchy;
pub use image_io::{AffinityMap, Direction, EdgeProbMap, LabelMap, RgbImage};
