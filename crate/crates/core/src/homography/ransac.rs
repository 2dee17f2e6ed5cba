use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{reprojection_residual, solve_homography, Homography, HomographyError, PointPair};
use crate::field::{FlowField, PixelCoord};

#[derive(Clone, Debug, PartialEq)]
pub struct RansacConfig {
    /// Points per minimal sample. Must be 4.
    pub sample_n: usize,
    pub iterations: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Reprojection distance (px) below which a correspondence is an inlier.
    pub inlier_tol: f64,
    /// Spacing of the inlier-counting grid, in pixels.
    pub eval_stride: usize,
    pub rng_seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            sample_n: 4,
            iterations: 50,
            grid_rows: 4,
            grid_cols: 4,
            inlier_tol: 1.0,
            eval_stride: 8,
            rng_seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<(), HomographyError> {
        if self.sample_n != 4 {
            return Err(HomographyError::InvalidConfig("sample_n must be 4"));
        }
        if self.iterations == 0 {
            return Err(HomographyError::InvalidConfig("iterations must be at least 1"));
        }
        if self.grid_rows == 0
            || self.grid_cols == 0
            || self.grid_rows * self.grid_cols < self.sample_n
        {
            return Err(HomographyError::InvalidConfig(
                "grid must have at least sample_n cells",
            ));
        }
        if !(self.inlier_tol > 0.0) || !self.inlier_tol.is_finite() {
            return Err(HomographyError::InvalidConfig("inlier_tol must be positive"));
        }
        if self.eval_stride == 0 {
            return Err(HomographyError::InvalidConfig("eval_stride must be at least 1"));
        }
        Ok(())
    }

    /// Independent generator for one round, so rounds can run in any order.
    pub fn round_rng(&self, round: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(round as u64);
        rng
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RansacResult {
    pub homography: Homography,
    /// Fraction of the evaluation grid that the returned homography explains.
    pub inlier_fraction: f64,
    pub iterations_used: usize,
    /// Source pixels of the winning minimal sample.
    pub sample_points: Vec<PixelCoord>,
}

/// Draws one point from each of `sample_n` distinct grid cells.
///
/// Cells are picked uniformly without replacement; the pixel inside a cell is uniform.
/// Column `c` of a `cols`-wide grid spans pixels `[c*w/cols, (c+1)*w/cols)`.
pub fn stratified_sample<R: Rng + ?Sized>(
    field: &FlowField,
    cfg: &RansacConfig,
    rng: &mut R,
) -> Vec<PointPair> {
    let (w, h) = (field.width(), field.height());
    let cells = index::sample(rng, cfg.grid_rows * cfg.grid_cols, cfg.sample_n);
    cells
        .iter()
        .map(|cell| {
            let (row, col) = (cell / cfg.grid_cols, cell % cfg.grid_cols);
            let x0 = col * w / cfg.grid_cols;
            let x1 = (col + 1) * w / cfg.grid_cols;
            let y0 = row * h / cfg.grid_rows;
            let y1 = (row + 1) * h / cfg.grid_rows;
            let p = PixelCoord::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
            PointPair::from_flow(p, field.vector_f64(p))
        })
        .collect()
}

fn evaluation_grid(field: &FlowField, stride: usize) -> Vec<PointPair> {
    (0..field.height())
        .step_by(stride)
        .flat_map(|y| {
            (0..field.width()).step_by(stride).map(move |x| {
                let p = PixelCoord::new(x, y);
                PointPair::from_flow(p, field.vector_f64(p))
            })
        })
        .collect()
}

fn count_inliers(h: &Homography, pairs: &[PointPair], tol: f64) -> usize {
    pairs
        .iter()
        .filter(|pp| reprojection_residual(h, pp) < tol)
        .count()
}

/// Robust homography from a flow field: grid-stratified minimal samples, inlier voting on
/// a strided grid, and a final least-squares refit on the winner's inliers.
///
/// Exactly `cfg.iterations` rounds are attempted; degenerate rounds are skipped.
pub fn ransac_estimate(field: &FlowField, cfg: &RansacConfig) -> Result<RansacResult, HomographyError> {
    cfg.validate()?;
    let (w, h) = (field.width(), field.height());
    if w < 4.max(cfg.grid_cols) || h < 4.max(cfg.grid_rows) {
        return Err(HomographyError::FieldTooSmall {
            width: w,
            height: h,
            rows: cfg.grid_rows,
            cols: cfg.grid_cols,
        });
    }

    let grid = evaluation_grid(field, cfg.eval_stride);
    let mut best: Option<(usize, Homography, Vec<PointPair>)> = None;
    for round in 0..cfg.iterations {
        let mut rng = cfg.round_rng(round);
        let sample = stratified_sample(field, cfg, &mut rng);
        let Ok(hyp) = solve_homography(&sample) else {
            continue;
        };
        let score = count_inliers(&hyp, &grid, cfg.inlier_tol);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, hyp, sample));
        }
    }
    let (_, winner, sample) = best.ok_or(HomographyError::NoValidHypothesis)?;

    let inliers: Vec<PointPair> = grid
        .iter()
        .filter(|pp| reprojection_residual(&winner, pp) < cfg.inlier_tol)
        .copied()
        .collect();
    let homography = solve_homography(&inliers).unwrap_or(winner);
    let inlier_fraction = count_inliers(&homography, &grid, cfg.inlier_tol) as f64 / grid.len() as f64;

    Ok(RansacResult {
        homography,
        inlier_fraction,
        iterations_used: cfg.iterations,
        sample_points: sample.iter().map(|pp| pp.p).collect(),
    })
}

/// Probability that at least one of `iter` minimal samples of size `n` is outlier-free when
/// half of the points are inliers: `1 - (1 - 0.5^n)^iter`.
pub fn ideal_success_rate(n: u32, iter: u32) -> f64 {
    let all_inliers = 0.5f64.powi(n as i32);
    1.0 - (1.0 - all_inliers).powi(iter as i32)
}
