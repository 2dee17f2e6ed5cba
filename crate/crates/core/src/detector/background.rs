use crate::field::FlowField;
use crate::homography::Homography;

/// Flow that every static pixel would show under a given homography.
///
/// Pixels whose projection lands at infinity hold `None` and are treated as background by
/// the judges.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundFlow {
    width: usize,
    height: usize,
    vectors: Vec<Option<[f64; 2]>>,
}

impl BackgroundFlow {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vectors(&self) -> &[Option<[f64; 2]>] {
        &self.vectors
    }

    pub fn at(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        self.vectors[y * self.width + x]
    }

    pub fn same_shape(&self, flow: &FlowField) -> bool {
        self.width == flow.width() && self.height == flow.height()
    }

    /// Number of pixels without a finite ideal vector.
    pub fn invalid_count(&self) -> usize {
        self.vectors.iter().filter(|v| v.is_none()).count()
    }
}

/// `H * p - p` at every pixel.
pub fn ideal_background_flow(h: &Homography, width: usize, height: usize) -> BackgroundFlow {
    let mut vectors = Vec::with_capacity(width * height);
    for y in 0..height {
        let yf = y as f64;
        for x in 0..width {
            let xf = x as f64;
            vectors.push(h.apply(xf, yf).map(|[qx, qy]| [qx - xf, qy - yf]));
        }
    }
    BackgroundFlow {
        width,
        height,
        vectors,
    }
}

/// Derivative along one axis from the neighbours that exist, central where possible.
#[inline]
fn axis_derivative(prev: Option<f64>, cur: f64, next: Option<f64>) -> Option<f64> {
    match (prev, next) {
        (Some(p), Some(n)) => Some(0.5 * (n - p)),
        (None, Some(n)) => Some(n - cur),
        (Some(p), None) => Some(cur - p),
        (None, None) => None,
    }
}

/// Mean over pixels of the gradient norm of the ideal flow magnitude.
///
/// Central differences inside the frame, one-sided at borders. For a pure zoom by `s` the
/// magnitude is `|s - 1| * |p - c|`, so the result is `|s - 1|`.
pub fn magnitude_gradient(ideal: &BackgroundFlow) -> f64 {
    let (w, h) = (ideal.width, ideal.height);
    let mag: Vec<Option<f64>> = ideal
        .vectors
        .iter()
        .map(|v| v.map(|[u, v]| u.hypot(v)))
        .collect();
    let at = |x: usize, y: usize| mag[y * w + x];

    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            let Some(cur) = at(x, y) else { continue };
            let left = if x > 0 { at(x - 1, y) } else { None };
            let right = if x + 1 < w { at(x + 1, y) } else { None };
            let up = if y > 0 { at(x, y - 1) } else { None };
            let down = if y + 1 < h { at(x, y + 1) } else { None };
            let (Some(gx), Some(gy)) = (
                axis_derivative(left, cur, right),
                axis_derivative(up, cur, down),
            ) else {
                continue;
            };
            sum += gx.hypot(gy);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_zero_flow() {
        let f = ideal_background_flow(&Homography::identity(), 16, 9);
        assert!(f.vectors().iter().all(|v| *v == Some([0.0, 0.0])));
    }

    #[test]
    fn translation_gives_constant_flow() {
        let f = ideal_background_flow(&Homography::translation(3.0, -2.0), 20, 10);
        assert!(f.vectors().iter().all(|v| *v == Some([3.0, -2.0])));
    }

    #[test]
    fn zoom_about_origin() {
        // (s - 1) * p for s = 1.05.
        let h = Homography::zoom_about(1.05, [0.0, 0.0]);
        let f = ideal_background_flow(&h, 128, 64);
        let [u, v] = f.at(100, 40).unwrap();
        assert!((u - 5.0).abs() < 1e-12 && (v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_pixels_are_flagged() {
        let h = Homography::from_row_major([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -0.25, 0.0, 1.0]).unwrap();
        let f = ideal_background_flow(&h, 8, 2);
        assert!(f.at(4, 0).is_none() && f.at(4, 1).is_none());
        assert_eq!(f.invalid_count(), 2);
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let f = ideal_background_flow(&Homography::translation(4.0, 1.0), 32, 24);
        assert_eq!(magnitude_gradient(&f), 0.0);
    }

    #[test]
    fn radial_field_gradient_matches_scale_change() {
        for ds in [0.05, 0.02] {
            let h = Homography::zoom_about(1.0 + ds, [160.0, 120.0]);
            let g = magnitude_gradient(&ideal_background_flow(&h, 320, 240));
            assert!((g - ds).abs() <= 0.02 * ds, "ds={ds} g={g}");
        }
        let g = magnitude_gradient(&ideal_background_flow(
            &Homography::zoom_about(1.02, [160.0, 120.0]),
            320,
            240,
        ));
        assert!(g < 0.032);
    }

    #[test]
    fn gradient_skips_invalid_pixels() {
        let h = Homography::from_row_major([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -0.25, 0.0, 1.0]).unwrap();
        let g = magnitude_gradient(&ideal_background_flow(&h, 8, 4));
        assert!(g.is_finite());
    }
}
