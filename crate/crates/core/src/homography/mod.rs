//! Camera motion as a homography `H(t -> t-k)` estimated from a flow field.

mod ransac;
mod solve;

pub use ransac::{ideal_success_rate, ransac_estimate, stratified_sample, RansacConfig, RansacResult};
pub use solve::{reprojection_residual, solve_homography};

use nalgebra::Matrix3;
use thiserror::Error;

use crate::field::PixelCoord;

/// Signed area below which three sample points count as collinear (px²).
pub const COLLINEAR_AREA_TOL: f64 = 1e-6;
/// Homogeneous scale below which a projection is treated as a point at infinity.
pub const W_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomographyError {
    #[error("at least 4 point pairs are required, got {0}")]
    TooFewPairs(usize),
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),
    #[error("matrix cannot be normalized to h33 = 1")]
    NotNormalizable,
    #[error("every RANSAC round produced a degenerate sample")]
    NoValidHypothesis,
    #[error("invalid RANSAC configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("field of {width}x{height} is too small for a {rows}x{cols} sampling grid")]
    FieldTooSmall {
        width: usize,
        height: usize,
        rows: usize,
        cols: usize,
    },
}

/// 3x3 projective transform normalized so that the bottom-right entry is exactly 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, HomographyError> {
        let s = m[(2, 2)];
        if !s.is_finite() || s.abs() < W_EPSILON {
            return Err(HomographyError::NotNormalizable);
        }
        let mut m = m / s;
        m[(2, 2)] = 1.0;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(HomographyError::NotNormalizable);
        }
        Ok(Self { m })
    }

    /// From 9 values in row-major order.
    pub fn from_row_major(v: [f64; 9]) -> Result<Self, HomographyError> {
        Self::from_matrix(Matrix3::from_row_slice(&v))
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        let mut m = Matrix3::identity();
        m[(0, 2)] = dx;
        m[(1, 2)] = dy;
        Self { m }
    }

    /// Uniform scale `s` about `center`.
    pub fn zoom_about(s: f64, center: [f64; 2]) -> Self {
        let [cx, cy] = center;
        Self {
            m: Matrix3::new(s, 0.0, (1.0 - s) * cx, 0.0, s, (1.0 - s) * cy, 0.0, 0.0, 1.0),
        }
    }

    /// Rotation by `theta` radians about `center` (image axes, +y down).
    pub fn rotation_about(theta: f64, center: [f64; 2]) -> Self {
        let [cx, cy] = center;
        let (s, c) = theta.sin_cos();
        Self {
            m: Matrix3::new(
                c,
                -s,
                cx - c * cx + s * cy,
                s,
                c,
                cy - s * cx - c * cy,
                0.0,
                0.0,
                1.0,
            ),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Entry at 1-based `(row, col)`, so `get(1, 3)` and `get(2, 3)` are the translation terms.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!((1..=3).contains(&row) && (1..=3).contains(&col));
        self.m[(row - 1, col - 1)]
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// Inhomogeneous image of `(x, y)`, or `None` when it maps to infinity.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let m = &self.m;
        let w = m[(2, 0)] * x + m[(2, 1)] * y + m[(2, 2)];
        if w.abs() < W_EPSILON {
            return None;
        }
        Some([
            (m[(0, 0)] * x + m[(0, 1)] * y + m[(0, 2)]) / w,
            (m[(1, 0)] * x + m[(1, 1)] * y + m[(1, 2)]) / w,
        ])
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Homography) -> Result<Homography, HomographyError> {
        Self::from_matrix(self.m * first.m)
    }

    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        (self.m - other.m).abs().max()
    }

    /// CSV row of the 9 entries, row-major.
    pub fn to_csv(&self) -> String {
        self.to_row_major()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Largest displacement between the images of the four frame corners under `a` and `b`.
pub fn corner_deviation(a: &Homography, b: &Homography, width: usize, height: usize) -> f64 {
    let (w, h) = ((width - 1) as f64, (height - 1) as f64);
    [[0.0, 0.0], [w, 0.0], [0.0, h], [w, h]]
        .iter()
        .map(|&[x, y]| match (a.apply(x, y), b.apply(x, y)) {
            (Some(p), Some(q)) => (p[0] - q[0]).hypot(p[1] - q[1]),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// A correspondence: pixel `p` in frame `t` and its location `q` in frame `t-k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPair {
    pub p: PixelCoord,
    pub q: [f64; 2],
}

impl PointPair {
    pub fn new(p: PixelCoord, q: [f64; 2]) -> Self {
        Self { p, q }
    }

    /// `q = p + flow`.
    pub fn from_flow(p: PixelCoord, flow: [f64; 2]) -> Self {
        Self {
            p,
            q: [p.x as f64 + flow[0], p.y as f64 + flow[1]],
        }
    }
}
