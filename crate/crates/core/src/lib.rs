//! Clustering of 2D embedding projections from a kernel density map.
//!
//! Points are binned onto a pixel grid and smoothed into a density map
//! ([`grid`]). The map is split into regions by hill climbing, fragmented
//! regions are merged and the result is truncated at a fraction of each
//! cluster's peak ([`cluster`]). Regions are then traced into polygons and
//! rectangle covers ([`geometry`]) which drive SQL predicates and c-TF-IDF
//! labels ([`labeling`]).

pub mod cluster;
pub mod disjoint_set;
pub mod document;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod ingest;
pub mod labeling;
pub mod oracles;
pub mod synthetic;

pub use cluster::{
    cluster_density_map, ClusterGraph, ClusterId, ClusterMap, ClusterParams, Clustering,
    Connectivity, Pixel,
};
pub use error::{Error, Result};
pub use grid::{DensityMap, Point2D, Viewport};
