//! Segmentation of multiply oriented and curved handwritten text lines.
//!
//! The pipeline enhances text lines with a bank of second-derivative
//! anisotropic Gaussians over all orientations and a height-derived scale
//! range, binarizes the enhanced image into blob lines, removes false
//! ligatures between lines, re-joins broken blob lines with a minimum
//! spanning tree and finally assigns connected components to blob lines by
//! energy minimization.
//!
//! Alongside the segmenter the crate provides ground-truth codecs (raw label
//! PNG, DIVA RGB labeling, PAGE XML polygons), the IU evaluation protocol and
//! a synthetic page generator.

pub mod blob;
pub mod config;
pub mod energy;
pub mod error;
pub mod eval;
pub mod filter_bank;
pub mod geometry;
pub mod gt;
pub mod imaging;
pub mod merge;
pub mod niblack;
pub mod pipeline;
pub mod render;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
pub use imaging::{BinaryImage, BlobMask, ConnectedComponent, HeightStats, Pixel};
