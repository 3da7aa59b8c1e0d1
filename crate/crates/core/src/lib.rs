//! Full-coverage tile-based detection of AI-generated images.
//!
//! The pipeline processes an image along two paths: a resized global view for
//! context and a set of native-resolution tiles that jointly cover every
//! pixel, so high-frequency generation artifacts survive preprocessing. A
//! small dual-path vision transformer aggregates tile features for
//! classification, localizes forged tokens, and regresses the JPEG quality
//! factor as an auxiliary task. Spectral tooling quantifies why cropping
//! preserves the evidence that resizing destroys.

pub mod augment;
pub mod cli;
mod fft;
pub mod image;
pub mod model;
pub mod spectral;
pub mod tiling;
pub mod train;
