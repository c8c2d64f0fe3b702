//! Diachronic embedding analysis: corpus preparation, SGNS training,
//! Procrustes alignment, drift measures, value axes and stability controls.

pub mod alignment;
pub mod axes;
pub mod corpus;
pub mod drift;
pub mod embeddings;
pub mod error;
pub mod linalg;
pub mod scalar;
pub mod seeds;
pub mod stability;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Space = embeddings::EmbeddingSpace<f64>;
pub type Space32 = embeddings::EmbeddingSpace<f32>;
pub type AlignmentMap64 = alignment::AlignmentMap<f64>;
pub type AlignmentMap32 = alignment::AlignmentMap<f32>;
pub type Axis64 = axes::Axis<f64>;
