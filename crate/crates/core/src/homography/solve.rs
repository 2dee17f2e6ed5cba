use nalgebra::{DMatrix, Matrix3};

use super::{Homography, HomographyError, PointPair, COLLINEAR_AREA_TOL};

/// Ratio of the two smallest singular values below which the system is rank deficient.
const RANK_TOL: f64 = 1e-9;

/// Similarity moving the centroid to the origin with mean distance `sqrt(2)`.
fn normalizing_transform(points: impl Iterator<Item = [f64; 2]> + Clone) -> Option<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points
        .clone()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    let (cx, cy) = (sx / n, sy / n);
    let mean_dist = points.map(|p| (p[0] - cx).hypot(p[1] - cy)).sum::<f64>() / n;
    if !(mean_dist > 1e-12) {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn triangle_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
}

fn has_collinear_triple(points: &[[f64; 2]]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if triangle_area(points[i], points[j], points[k]) < COLLINEAR_AREA_TOL {
                    return true;
                }
            }
        }
    }
    false
}

/// Linear least-squares homography from point correspondences.
///
/// Both point sets are centered and scaled to mean distance `sqrt(2)`, the 2n homogeneous
/// equations are solved for the right singular vector of the smallest singular value, and
/// the result is mapped back to pixel coordinates with `h33 = 1`. Minimal samples (exactly
/// four pairs) are rejected when any three source points are collinear.
pub fn solve_homography(pairs: &[PointPair]) -> Result<Homography, HomographyError> {
    if pairs.len() < 4 {
        return Err(HomographyError::TooFewPairs(pairs.len()));
    }
    let src: Vec<[f64; 2]> = pairs.iter().map(|pp| pp.p.to_point()).collect();
    if pairs.len() == 4 && has_collinear_triple(&src) {
        return Err(HomographyError::DegenerateSample("three source points are collinear"));
    }

    let t_src = normalizing_transform(src.iter().copied())
        .ok_or(HomographyError::DegenerateSample("source points coincide"))?;
    let t_dst = normalizing_transform(pairs.iter().map(|pp| pp.q))
        .ok_or(HomographyError::DegenerateSample("target points coincide"))?;

    // A 4-point system has 8 rows; pad to square so the SVD exposes the null vector.
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (pp, s)) in pairs.iter().zip(&src).enumerate() {
        let x = t_src[(0, 0)] * s[0] + t_src[(0, 2)];
        let y = t_src[(1, 1)] * s[1] + t_src[(1, 2)];
        let qx = t_dst[(0, 0)] * pp.q[0] + t_dst[(0, 2)];
        let qy = t_dst[(1, 1)] * pp.q[1] + t_dst[(1, 2)];
        let r = 2 * i;
        a[(r, 0)] = x;
        a[(r, 1)] = y;
        a[(r, 2)] = 1.0;
        a[(r, 6)] = -qx * x;
        a[(r, 7)] = -qx * y;
        a[(r, 8)] = -qx;
        a[(r + 1, 3)] = x;
        a[(r + 1, 4)] = y;
        a[(r + 1, 5)] = 1.0;
        a[(r + 1, 6)] = -qy * x;
        a[(r + 1, 7)] = -qy * y;
        a[(r + 1, 8)] = -qy;
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("V requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let largest = svd.singular_values[order[order.len() - 1]];
    let second_smallest = svd.singular_values[order[1]];
    if !(largest > 0.0) || second_smallest / largest < RANK_TOL {
        return Err(HomographyError::DegenerateSample("linear system is rank deficient"));
    }
    let h = v_t.row(order[0]);
    let normalized = Matrix3::from_row_slice(&h.iter().copied().collect::<Vec<_>>());

    let t_dst_inv = t_dst
        .try_inverse()
        .ok_or(HomographyError::DegenerateSample("target normalization is singular"))?;
    Homography::from_matrix(t_dst_inv * normalized * t_src)
        .map_err(|_| HomographyError::DegenerateSample("solution has vanishing h33"))
}

/// Distance between the projection of `pair.p` and `pair.q`; infinite when `p` maps to infinity.
#[inline]
pub fn reprojection_residual(h: &Homography, pair: &PointPair) -> f64 {
    match h.apply(pair.p.x as f64, pair.p.y as f64) {
        Some([x, y]) => (x - pair.q[0]).hypot(y - pair.q[1]),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PixelCoord;

    fn corners() -> [PixelCoord; 4] {
        [
            PixelCoord::new(0, 0),
            PixelCoord::new(319, 0),
            PixelCoord::new(0, 239),
            PixelCoord::new(319, 239),
        ]
    }

    fn pairs_from(h: &Homography, pts: &[PixelCoord]) -> Vec<PointPair> {
        pts.iter()
            .map(|&p| PointPair::new(p, h.apply(p.x as f64, p.y as f64).unwrap()))
            .collect()
    }

    #[test]
    fn zero_flow_gives_identity() {
        let pairs: Vec<_> = corners()
            .iter()
            .map(|&p| PointPair::from_flow(p, [0.0, 0.0]))
            .collect();
        let h = solve_homography(&pairs).unwrap();
        assert!(h.max_abs_diff(&Homography::identity()) < 1e-12);
    }

    #[test]
    fn pure_translation() {
        let pairs: Vec<_> = corners()
            .iter()
            .map(|&p| PointPair::from_flow(p, [3.0, -2.0]))
            .collect();
        let h = solve_homography(&pairs).unwrap();
        assert!(h.max_abs_diff(&Homography::translation(3.0, -2.0)) < 1e-12);
    }

    #[test]
    fn recovers_projective_map_from_corners() {
        // Forward application of a fixed perturbed-identity matrix is the oracle.
        let truth = Homography::from_row_major([
            1.03, -0.04, 7.5, 0.02, 0.97, -4.25, 2.0e-5, -3.0e-5, 1.0,
        ])
        .unwrap();
        let h = solve_homography(&pairs_from(&truth, &corners())).unwrap();
        assert!(h.max_abs_diff(&truth) < 1e-9, "{}", h.max_abs_diff(&truth));
    }

    #[test]
    fn overdetermined_exact_data() {
        let truth = Homography::from_row_major([
            0.9, 0.1, -12.0, -0.05, 1.1, 3.0, 1.0e-4, 2.0e-4, 1.0,
        ])
        .unwrap();
        let pts: Vec<_> = (0..10)
            .flat_map(|i| (0..8).map(move |j| PixelCoord::new(i * 32, j * 30)))
            .collect();
        let h = solve_homography(&pairs_from(&truth, &pts)).unwrap();
        assert!(h.max_abs_diff(&truth) < 1e-9);
    }

    #[test]
    fn too_few_pairs() {
        let pairs = pairs_from(&Homography::identity(), &corners()[..3]);
        assert_eq!(solve_homography(&pairs), Err(HomographyError::TooFewPairs(3)));
    }

    #[test]
    fn collinear_triple_is_degenerate() {
        let pts = [
            PixelCoord::new(0, 0),
            PixelCoord::new(10, 10),
            PixelCoord::new(20, 20),
            PixelCoord::new(0, 50),
        ];
        let pairs = pairs_from(&Homography::identity(), &pts);
        assert!(matches!(
            solve_homography(&pairs),
            Err(HomographyError::DegenerateSample(_))
        ));
    }

    #[test]
    fn all_points_on_one_line_is_degenerate() {
        let pts: Vec<_> = (0..8).map(|i| PixelCoord::new(i * 5, 7)).collect();
        let pairs = pairs_from(&Homography::translation(1.0, 1.0), &pts);
        assert!(matches!(
            solve_homography(&pairs),
            Err(HomographyError::DegenerateSample(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let p = PixelCoord::new(4, 9);
        let id = Homography::identity();
        assert_eq!(reprojection_residual(&id, &PointPair::from_flow(p, [0.0, 0.0])), 0.0);
        let r = reprojection_residual(&id, &PointPair::from_flow(p, [0.6, 0.8]));
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_infinite_at_horizon() {
        let h = Homography::from_row_major([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -0.1, 0.0, 1.0]).unwrap();
        let pair = PointPair::new(PixelCoord::new(10, 3), [0.0, 0.0]);
        assert_eq!(reprojection_residual(&h, &pair), f64::INFINITY);
    }

    #[test]
    fn residual_of_exact_pair_is_tiny() {
        let truth = Homography::from_row_major([
            1.03, -0.04, 7.5, 0.02, 0.97, -4.25, 2.0e-5, -3.0e-5, 1.0,
        ])
        .unwrap();
        for pair in pairs_from(&truth, &corners()) {
            assert!(reprojection_residual(&truth, &pair) < 1e-9);
        }
    }
}
