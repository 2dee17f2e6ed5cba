//! Frame-averaged F-measure and success-rate curve.
//!
//! Precision, recall and F-measure are computed per frame and then averaged, so frames with
//! small foreground weigh as much as frames with large foreground.

use thiserror::Error;

use crate::field::ForegroundMask;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("mask dimensions differ: {pred:?} vs {gt:?}")]
    DimensionMismatch {
        pred: (usize, usize),
        gt: (usize, usize),
    },
    #[error("empty sequence")]
    EmptySequence,
    #[error("thresholds must be ascending values in [0, 1]")]
    InvalidThresholds,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameScore {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl FrameScore {
    /// Scores from confusion counts.
    ///
    /// Empty ground truth with an empty prediction scores 1 across the board; any other case
    /// with an undefined ratio scores that ratio (and the F-measure) as 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let gt_pos = tp + fn_;
        let pred_pos = tp + fp;
        let (precision, recall, f_measure) = if gt_pos == 0 && pred_pos == 0 {
            (1.0, 1.0, 1.0)
        } else {
            let pr = if pred_pos > 0 { tp as f64 / pred_pos as f64 } else { 0.0 };
            let re = if gt_pos > 0 { tp as f64 / gt_pos as f64 } else { 0.0 };
            let fm = if pr + re > 0.0 { 2.0 * pr * re / (pr + re) } else { 0.0 };
            (pr, re, fm)
        };
        Self {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f_measure,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn gt_empty(&self) -> bool {
        self.tp + self.fn_ == 0
    }
}

pub fn frame_score(pred: &ForegroundMask, gt: &ForegroundMask) -> Result<FrameScore, MetricsError> {
    if !pred.same_shape(gt) {
        return Err(MetricsError::DimensionMismatch {
            pred: (pred.width(), pred.height()),
            gt: (gt.width(), gt.height()),
        });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(FrameScore::from_counts(tp, fp, fn_, tn))
}

/// Mean of the per-frame F-measures.
pub fn video_f_measure(scores: &[FrameScore]) -> Result<f64, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptySequence);
    }
    Ok(scores.iter().map(|s| s.f_measure).sum::<f64>() / scores.len() as f64)
}

/// Confusion counts summed over all frames, scored as one big frame.
pub fn pooled_score(scores: &[FrameScore]) -> Result<FrameScore, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptySequence);
    }
    let (tp, fp, fn_, tn) = scores.iter().fold((0, 0, 0, 0), |acc, s| {
        (acc.0 + s.tp, acc.1 + s.fp, acc.2 + s.fn_, acc.3 + s.tn)
    });
    Ok(FrameScore::from_counts(tp, fp, fn_, tn))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SrCurve {
    pub thresholds: Vec<f64>,
    pub rates: Vec<f64>,
}

impl SrCurve {
    /// Success rate at the first threshold not below `t`.
    pub fn rate_at(&self, t: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&x| x >= t - 1e-12)
            .map(|i| self.rates[i])
    }
}

/// Fraction of frames with F-measure strictly above each threshold.
pub fn success_rate_curve(fm: &[f64], thresholds: &[f64]) -> Result<SrCurve, MetricsError> {
    if fm.is_empty() {
        return Err(MetricsError::EmptySequence);
    }
    let in_range = thresholds.iter().all(|t| (0.0..=1.0).contains(t));
    let ascending = thresholds.windows(2).all(|w| w[0] <= w[1]);
    if !in_range || !ascending {
        return Err(MetricsError::InvalidThresholds);
    }
    let n = fm.len() as f64;
    let rates = thresholds
        .iter()
        .map(|&t| fm.iter().filter(|&&f| f > t).count() as f64 / n)
        .collect();
    Ok(SrCurve {
        thresholds: thresholds.to_vec(),
        rates,
    })
}

/// `0, step, 2*step, ..., 1`. The last point is always exactly 1.
pub fn threshold_grid(step: f64) -> Result<Vec<f64>, MetricsError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(MetricsError::InvalidThresholds);
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n)
        .map(|i| i as f64 * step)
        .filter(|&t| t < 1.0 - 1e-9)
        .collect();
    grid.push(1.0);
    Ok(grid)
}
