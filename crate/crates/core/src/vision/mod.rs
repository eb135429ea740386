//! Grayscale images, summed-area tables, Haar cascades, sliding-window
//! detection and silhouette measurement.

mod cascade;
mod detect;
mod haar;
mod image;
mod integral;
mod measure;

use thiserror::Error;

pub use cascade::{CascadeClassifier, Stage, WeakClassifier};
pub use detect::{detect, group, raw_detections, Detection, ScanParams};
pub use haar::{feature_value, FeatureKind, HaarFeature, Placement, WeightedRect};
pub use image::GrayImage;
pub use integral::{integral_image, rotated_integral_image, IntegralImage, Rect, RotatedIntegralImage, TiltedRect};
pub use measure::{
    estimate_measurements, BodyMeasurements, Landmark, MeasureConfig, MeasureError, MeasurementField, MeasurementSource,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("expected {expected} pixels, got {actual}")]
    PixelCount { expected: usize, actual: usize },
    #[error("invalid PGM: {0}")]
    Pgm(String),
    #[error("region out of bounds: {0}")]
    OutOfBounds(String),
    #[error("invalid feature: {0}")]
    InvalidFeature(String),
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),
    #[error("cascade line {line}: {message}")]
    CascadeSyntax { line: usize, message: String },
    #[error("invalid scan parameters: {0}")]
    InvalidScan(String),
}
