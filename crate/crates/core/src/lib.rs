//! Moving object detection for moving-camera video, driven by dense optical flow.
//!
//! The pipeline works on precomputed flow fields `f(t, t-k)` that carry each pixel of
//! frame `t` to its location in frame `t-k`:
//!
//! 1. [`homography::ransac_estimate`] fits the camera-induced motion as a homography,
//!    using grid-stratified minimal samples drawn straight from the flow field.
//! 2. [`detector::ideal_background_flow`] turns that homography into the flow every
//!    static pixel would have, which is the background model.
//! 3. [`detector::detect_frame`] compares observed and ideal flow with one of two judges:
//!    a magnitude judge with a speed-adaptive threshold, or a direction (cosine) judge
//!    that takes over when the camera is evidently zooming.
//!
//! [`metrics`] implements the frame-averaged F-measure and success-rate curve, and
//! [`synth`] generates flow sequences with exact ground truth for testing.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detector;
pub mod field;
pub mod homography;
pub mod io;
pub mod kv;
pub mod metrics;
pub mod synth;

pub use detector::{detect_frame, DetectError, DetectorConfig, FrameDetection, JudgeMode};
pub use field::{flow_magnitude, FieldError, FlowField, ForegroundMask, PixelCoord};
pub use homography::{Homography, HomographyError, RansacConfig, RansacResult};
