//! Background model and dual-mode foreground judge.
//!
//! Per frame: estimate the camera homography, build the ideal background flow from it,
//! decide whether the camera is evidently zooming, then label pixels either by the length
//! of the flow residual (normal motion) or by the angle between observed and ideal flow
//! (zoom, where residual lengths grow with distance from the vanishing point).

mod background;
mod judge;
mod zoom;

pub use background::{ideal_background_flow, magnitude_gradient, BackgroundFlow};
pub use judge::{adaptive_threshold, cosine_mask, magnitude_mask};
pub use zoom::{vanishing_point, zoom_indicator, JudgeMode, ModeDecision};

use thiserror::Error;

use crate::field::{FieldError, FlowField, ForegroundMask, PixelCoord};
use crate::homography::{ransac_estimate, Homography, HomographyError, RansacConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("flow is {flow:?} but ideal field is {ideal:?}")]
    DimensionMismatch {
        flow: (usize, usize),
        ideal: (usize, usize),
    },
    #[error("vanishing point needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("flow interval k={flow} does not match configured k={config}")]
    IntervalMismatch { flow: u32, config: u32 },
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("frame failed: {0}")]
    FrameFailed(HomographyError),
    #[error(transparent)]
    Homography(HomographyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    pub interval_k: u32,
    /// Static threshold per frame of interval; the magnitude judge uses `a1_per_frame * k`.
    pub a1_per_frame: f64,
    pub a2: f64,
    /// Zoom trigger on the mean gradient of the ideal flow magnitude.
    pub t_g: f64,
    pub t_c: f64,
    /// Flow length (px) below which the cosine judge falls back to the magnitude rule.
    pub eps_mag: f64,
    pub ransac: RansacConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            interval_k: 5,
            a1_per_frame: 0.1,
            a2: 0.3,
            t_g: 0.032,
            t_c: 0.99,
            eps_mag: 0.1,
            ransac: RansacConfig::default(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        if self.interval_k == 0 {
            return Err(DetectError::InvalidConfig("interval_k must be at least 1"));
        }
        if !(self.a1_per_frame >= 0.0) || !self.a1_per_frame.is_finite() {
            return Err(DetectError::InvalidConfig("a1_per_frame must be non-negative"));
        }
        if !(self.a2 >= 0.0) || !self.a2.is_finite() {
            return Err(DetectError::InvalidConfig("a2 must be non-negative"));
        }
        if !(self.t_g > 0.0) || !self.t_g.is_finite() {
            return Err(DetectError::InvalidConfig("t_g must be positive"));
        }
        if !(-1.0..=1.0).contains(&self.t_c) {
            return Err(DetectError::InvalidConfig("t_c must lie in [-1, 1]"));
        }
        if !(self.eps_mag > 0.0) || !self.eps_mag.is_finite() {
            return Err(DetectError::InvalidConfig("eps_mag must be positive"));
        }
        self.ransac.validate().map_err(DetectError::Homography)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameDetection {
    pub mask: ForegroundMask,
    pub homography: Homography,
    pub mode: ModeDecision,
    /// Pixels in magnitude mode, cosine value in cosine mode.
    pub threshold_used: f64,
    pub inlier_fraction: f64,
    pub sample_points: Vec<PixelCoord>,
}

/// Detects moving pixels in one flow field.
///
/// A degenerate RANSAC run surfaces as [`DetectError::FrameFailed`]; stream callers are
/// expected to emit an all-background mask for that frame and carry on.
pub fn detect_frame(flow: &FlowField, cfg: &DetectorConfig) -> Result<FrameDetection, DetectError> {
    cfg.validate()?;
    if flow.interval_k() != cfg.interval_k {
        return Err(DetectError::IntervalMismatch {
            flow: flow.interval_k(),
            config: cfg.interval_k,
        });
    }
    let (w, h) = (flow.width(), flow.height());
    let estimate = ransac_estimate(flow, &cfg.ransac).map_err(|e| match e {
        HomographyError::NoValidHypothesis => DetectError::FrameFailed(e),
        other => DetectError::Homography(other),
    })?;
    let homography = estimate.homography;
    let ideal = ideal_background_flow(&homography, w, h);

    // The winning sample stands in for the background; its ideal flow gives the directions.
    let samples: Vec<(PixelCoord, [f64; 2])> = estimate
        .sample_points
        .iter()
        .filter_map(|&p| ideal.at(p.x, p.y).map(|v| (p, v)))
        .collect();
    let vp = if samples.len() >= 2 {
        vanishing_point(&samples)?
    } else {
        None
    };
    let mode = zoom_indicator(vp, magnitude_gradient(&ideal), w, h, cfg.t_g);

    let t_a = adaptive_threshold(&homography, cfg);
    let (mask, threshold_used) = match mode.mode {
        JudgeMode::Magnitude => (magnitude_mask(flow, &ideal, t_a)?, t_a),
        JudgeMode::Cosine => (cosine_mask(flow, &ideal, cfg.t_c, cfg.eps_mag, t_a)?, cfg.t_c),
    };

    Ok(FrameDetection {
        mask,
        homography,
        mode,
        threshold_used,
        inlier_fraction: estimate.inlier_fraction,
        sample_points: estimate.sample_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let c = DetectorConfig::default();
        assert_eq!(c.interval_k, 5);
        assert!((c.a1_per_frame * 5.0 - 0.5).abs() < 1e-12);
        assert_eq!((c.a2, c.t_g, c.t_c), (0.3, 0.032, 0.99));
        assert_eq!((c.ransac.sample_n, c.ransac.iterations), (4, 50));
        assert_eq!(c.ransac.grid_rows * c.ransac.grid_cols, 16);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn invalid_config() {
        let bad = DetectorConfig {
            t_c: 1.5,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(DetectError::InvalidConfig(_))));
        let bad = DetectorConfig {
            eps_mag: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_flow_static_camera() {
        let flow = FlowField::constant(64, 48, 5, [0.0, 0.0]).unwrap();
        let d = detect_frame(&flow, &DetectorConfig::default()).unwrap();
        assert!(d.homography.max_abs_diff(&Homography::identity()) < 1e-9);
        assert!(d.mask.is_empty());
        assert_eq!(d.mode.mode, JudgeMode::Magnitude);
        assert_eq!(d.mask.width(), 64);
    }

    #[test]
    fn interval_must_match() {
        let flow = FlowField::constant(64, 48, 3, [0.0, 0.0]).unwrap();
        assert_eq!(
            detect_frame(&flow, &DetectorConfig::default()),
            Err(DetectError::IntervalMismatch { flow: 3, config: 5 })
        );
    }
}
