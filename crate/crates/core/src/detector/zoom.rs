use super::DetectError;
use crate::field::PixelCoord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JudgeMode {
    Magnitude,
    Cosine,
}

impl JudgeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            JudgeMode::Magnitude => "magnitude",
            JudgeMode::Cosine => "cosine",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeDecision {
    pub mode: JudgeMode,
    pub vanishing_point: Option<[f64; 2]>,
    pub magnitude_gradient: f64,
}

/// Least-squares intersection of the lines through each sample along its flow direction.
///
/// Each sample contributes the row `(v, -u)` with right-hand side `v*x - u*y`. Returns
/// `None` when the 2x2 normal matrix is near singular, i.e. the directions are parallel.
pub fn vanishing_point(samples: &[(PixelCoord, [f64; 2])]) -> Result<Option<[f64; 2]>, DetectError> {
    if samples.len() < 2 {
        return Err(DetectError::TooFewSamples(samples.len()));
    }
    let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(p, [u, v]) in samples {
        let (x, y) = (p.x as f64, p.y as f64);
        let rhs = v * x - u * y;
        a00 += v * v;
        a01 -= v * u;
        a11 += u * u;
        b0 += v * rhs;
        b1 -= u * rhs;
    }
    let det = a00 * a11 - a01 * a01;
    let trace = a00 + a11;
    if !(trace > 0.0) || det < 1e-9 * trace * trace {
        return Ok(None);
    }
    Ok(Some([(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det]))
}

/// Cosine mode iff the vanishing point lies in `[0, w] x [0, h]` and the gradient exceeds `t_g`.
pub fn zoom_indicator(
    vanishing_point: Option<[f64; 2]>,
    magnitude_gradient: f64,
    width: usize,
    height: usize,
    t_g: f64,
) -> ModeDecision {
    let inside = vanishing_point.is_some_and(|[x, y]| {
        (0.0..=width as f64).contains(&x) && (0.0..=height as f64).contains(&y)
    });
    let mode = if inside && magnitude_gradient > t_g {
        JudgeMode::Cosine
    } else {
        JudgeMode::Magnitude
    };
    ModeDecision {
        mode,
        vanishing_point,
        magnitude_gradient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(points: &[(usize, usize)], f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<(PixelCoord, [f64; 2])> {
        points
            .iter()
            .map(|&(x, y)| (PixelCoord::new(x, y), f(x as f64, y as f64)))
            .collect()
    }

    #[test]
    fn zoom_flow_meets_at_center() {
        let s = samples(&[(20, 30), (300, 20), (40, 220), (280, 200)], |x, y| {
            [0.05 * (x - 160.0), 0.05 * (y - 120.0)]
        });
        let p = vanishing_point(&s).unwrap().unwrap();
        assert!((p[0] - 160.0).abs() < 1e-6 && (p[1] - 120.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn parallel_flow_has_no_vanishing_point() {
        let s = samples(&[(20, 30), (300, 20), (40, 220), (280, 200)], |_, _| [3.0, 0.0]);
        assert_eq!(vanishing_point(&s).unwrap(), None);
    }

    #[test]
    fn zoom_rotation_about_center() {
        // f = (s R - I)(p - c). Lines are not concurrent for theta != 0, but for samples
        // symmetric under a quarter turn about c the least-squares point is c by symmetry.
        let (s, theta) = (1.04f64, 0.03f64);
        let (sn, cs) = theta.sin_cos();
        let f = |x: f64, y: f64| {
            let (dx, dy) = (x - 160.0, y - 120.0);
            [s * (cs * dx - sn * dy) - dx, s * (sn * dx + cs * dy) - dy]
        };
        let pts = [(230, 150), (130, 190), (90, 90), (190, 50)];
        let p = vanishing_point(&samples(&pts, f)).unwrap().unwrap();
        assert!((p[0] - 160.0).abs() < 1e-6 && (p[1] - 120.0).abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn too_few_samples() {
        let s = samples(&[(1, 1)], |_, _| [1.0, 1.0]);
        assert_eq!(vanishing_point(&s), Err(DetectError::TooFewSamples(1)));
    }

    #[test]
    fn zero_flow_has_no_vanishing_point() {
        let s = samples(&[(1, 1), (5, 9)], |_, _| [0.0, 0.0]);
        assert_eq!(vanishing_point(&s).unwrap(), None);
    }

    #[test]
    fn indicator_cases() {
        let d = zoom_indicator(Some([160.0, 120.0]), 0.05, 320, 240, 0.032);
        assert_eq!(d.mode, JudgeMode::Cosine);
        assert_eq!(zoom_indicator(None, 0.5, 320, 240, 0.032).mode, JudgeMode::Magnitude);
        assert_eq!(
            zoom_indicator(Some([500.0, 120.0]), 0.05, 320, 240, 0.032).mode,
            JudgeMode::Magnitude
        );
        assert_eq!(
            zoom_indicator(Some([160.0, 120.0]), 0.02, 320, 240, 0.032).mode,
            JudgeMode::Magnitude
        );
        // The frame range is closed on both ends.
        assert_eq!(
            zoom_indicator(Some([320.0, 0.0]), 0.05, 320, 240, 0.032).mode,
            JudgeMode::Cosine
        );
    }
}
