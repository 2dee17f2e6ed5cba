//! Dense per-pixel containers: flow fields and foreground masks.
//!
//! Coordinates are `x` = column, `y` = row, origin at the top-left pixel, and all grids
//! are stored row-major with the top row first.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} entries for the given dimensions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite flow vector at pixel ({x}, {y})")]
    NonFinite { x: usize, y: usize },
    #[error("frame interval must be at least 1")]
    ZeroInterval,
}

/// A pixel location in a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelCoord {
    pub x: usize,
    pub y: usize,
}

impl PixelCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// The pixel as a real-valued point.
    pub fn to_point(self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }
}

/// Dense displacement field between frame `t` and frame `t - interval_k`.
///
/// The vector at pixel `p` is `(u, v)` such that `p + (u, v)` is the location of the same
/// scene point in the earlier frame. Every component is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    interval_k: u32,
    vectors: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn new(
        width: usize,
        height: usize,
        interval_k: u32,
        vectors: Vec<[f32; 2]>,
    ) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::EmptyDimensions { width, height });
        }
        if interval_k == 0 {
            return Err(FieldError::ZeroInterval);
        }
        let expected = width * height;
        if vectors.len() != expected {
            return Err(FieldError::LengthMismatch {
                expected,
                actual: vectors.len(),
            });
        }
        if let Some(i) = vectors
            .iter()
            .position(|v| !(v[0].is_finite() && v[1].is_finite()))
        {
            return Err(FieldError::NonFinite {
                x: i % width,
                y: i / width,
            });
        }
        Ok(Self {
            width,
            height,
            interval_k,
            vectors,
        })
    }

    /// A field where every pixel has the same displacement.
    pub fn constant(
        width: usize,
        height: usize,
        interval_k: u32,
        vector: [f32; 2],
    ) -> Result<Self, FieldError> {
        Self::new(width, height, interval_k, vec![vector; width * height])
    }

    /// Builds a field by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        interval_k: u32,
        mut f: impl FnMut(usize, usize) -> [f32; 2],
    ) -> Result<Self, FieldError> {
        let mut vectors = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                vectors.push(f(x, y));
            }
        }
        Self::new(width, height, interval_k, vectors)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn interval_k(&self) -> u32 {
        self.interval_k
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    /// Same vectors, different interval tag.
    pub fn with_interval(mut self, interval_k: u32) -> Result<Self, FieldError> {
        if interval_k == 0 {
            return Err(FieldError::ZeroInterval);
        }
        self.interval_k = interval_k;
        Ok(self)
    }

    /// Flow vector at `(x, y)`. Panics if out of bounds.
    pub fn at(&self, x: usize, y: usize) -> [f32; 2] {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.vectors[y * self.width + x]
    }

    /// Flow at `p` widened to `f64`.
    pub fn vector_f64(&self, p: PixelCoord) -> [f64; 2] {
        let v = self.at(p.x, p.y);
        [f64::from(v[0]), f64::from(v[1])]
    }

    pub fn into_vectors(self) -> Vec<[f32; 2]> {
        self.vectors
    }
}

/// Per-pixel binary labeling, `true` = foreground.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ForegroundMask {
    width: usize,
    height: usize,
    labels: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: usize, height: usize, labels: Vec<bool>) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::EmptyDimensions { width, height });
        }
        if labels.len() != width * height {
            return Err(FieldError::LengthMismatch {
                expected: width * height,
                actual: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// All-background mask.
    pub fn background(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            labels: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, foreground: bool) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.labels[y * self.width + x] = foreground;
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.labels.iter().any(|&l| l)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Per-pixel Euclidean norm of the flow, row-major, same dimensions as the field.
pub fn flow_magnitude(field: &FlowField) -> Vec<f64> {
    field
        .vectors
        .iter()
        .map(|v| f64::from(v[0]).hypot(f64::from(v[1])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_wrong_length() {
        let err = FlowField::new(2, 2, 1, vec![[0.0, 0.0]; 3]).unwrap_err();
        assert_eq!(
            err,
            FieldError::LengthMismatch {
                expected: 4,
                actual: 3
            }
        );
    }

    #[test]
    fn rejects_non_finite() {
        let mut v = vec![[0.0, 0.0]; 6];
        v[4] = [f32::NAN, 0.0];
        assert_eq!(
            FlowField::new(3, 2, 1, v).unwrap_err(),
            FieldError::NonFinite { x: 1, y: 1 }
        );
        let mut v = vec![[0.0, 0.0]; 6];
        v[0] = [0.0, f32::INFINITY];
        assert!(FlowField::new(3, 2, 1, v).is_err());
    }

    #[test]
    fn rejects_zero_interval_and_empty() {
        assert_eq!(
            FlowField::new(1, 1, 0, vec![[0.0, 0.0]]).unwrap_err(),
            FieldError::ZeroInterval
        );
        assert!(FlowField::new(0, 3, 1, vec![]).is_err());
    }

    #[test]
    fn magnitude_of_three_four() {
        let f = FlowField::constant(1, 1, 1, [3.0, 4.0]).unwrap();
        assert_eq!(flow_magnitude(&f), vec![5.0]);
    }

    #[test]
    fn magnitude_of_zero_field() {
        let f = FlowField::constant(5, 4, 1, [0.0, 0.0]).unwrap();
        assert!(flow_magnitude(&f).iter().all(|&m| m == 0.0));
    }

    #[test]
    fn row_major_indexing() {
        let f = FlowField::from_fn(3, 2, 1, |x, y| [x as f32, y as f32]).unwrap();
        assert_eq!(f.vectors()[4], [1.0, 1.0]);
        assert_eq!(f.at(2, 1), [2.0, 1.0]);
    }

    fn finite_vectors(n: usize) -> impl Strategy<Value = Vec<[f32; 2]>> {
        proptest::collection::vec([-1e4f32..1e4, -1e4f32..1e4], n)
    }

    proptest! {
        #[test]
        fn magnitude_dominates_components(v in finite_vectors(12)) {
            let f = FlowField::new(4, 3, 1, v.clone()).unwrap();
            for (m, vec) in flow_magnitude(&f).iter().zip(&v) {
                let bound = f64::from(vec[0].abs().max(vec[1].abs()));
                prop_assert!(*m >= bound);
            }
        }

        #[test]
        fn magnitude_invariant_under_sign_flip_and_swap(v in finite_vectors(12)) {
            let f = FlowField::new(4, 3, 1, v.clone()).unwrap();
            let flipped: Vec<_> = v.iter().map(|a| [-a[1], a[0]]).collect();
            let g = FlowField::new(4, 3, 1, flipped).unwrap();
            prop_assert_eq!(flow_magnitude(&f), flow_magnitude(&g));
        }
    }
}
