use std::fmt;
use std::path::Path;
use std::time::Instant;

use flowseg::{detect_frame, DetectError, DetectorConfig, FlowField, ForegroundMask};

use crate::commands::load_flows;
use crate::{CliError, RunConfig};

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub frames: usize,
    pub repetitions: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    /// `(ransac iterations, median ms per frame)`.
    pub iteration_table: Vec<(usize, f64)>,
    pub slope_ms_per_iteration: f64,
    pub intercept_ms: f64,
    pub r_squared: f64,
    /// Masks from the last repetition at the configured settings.
    pub masks: Vec<ForegroundMask>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frames: {}  repetitions: {}", self.frames, self.repetitions)?;
        writeln!(
            f,
            "detect_frame median: {:.3} ms  p95: {:.3} ms",
            self.median_ms, self.p95_ms
        )?;
        writeln!(f, "iterations,median_ms")?;
        for (it, ms) in &self.iteration_table {
            writeln!(f, "{it},{ms:.3}")?;
        }
        write!(
            f,
            "linear fit: {:.4} ms/iteration + {:.3} ms, R^2 = {:.4}",
            self.slope_ms_per_iteration, self.intercept_ms, self.r_squared
        )
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 && sxx > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    percentile(samples, 0.5)
}

/// Runs every frame `reps` times, timing `detect_frame` alone.
fn time_frames(
    flows: &[(String, FlowField)],
    cfg: &DetectorConfig,
    reps: usize,
) -> Result<(Vec<f64>, Vec<ForegroundMask>), CliError> {
    let mut times = Vec::with_capacity(flows.len() * reps);
    let mut masks = Vec::new();
    for rep in 0..reps {
        for (stem, flow) in flows {
            let start = Instant::now();
            let result = detect_frame(flow, cfg);
            times.push(start.elapsed().as_secs_f64() * 1e3);
            let mask = match result {
                Ok(det) => det.mask,
                Err(DetectError::FrameFailed(_)) => {
                    ForegroundMask::background(flow.width(), flow.height())
                }
                Err(e) => return Err(CliError::Data(format!("frame {stem}: {e}"))),
            };
            if rep + 1 == reps {
                masks.push(mask);
            }
        }
    }
    Ok((times, masks))
}

pub fn run_bench(flow_dir: &Path, cfg: &RunConfig, reps: usize) -> Result<BenchReport, CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let flows = load_flows(flow_dir, cfg.detector.interval_k)?;

    // Warm-up pass, untimed.
    time_frames(&flows, &cfg.detector, 1)?;
    let (mut times, masks) = time_frames(&flows, &cfg.detector, reps)?;
    times.sort_by(f64::total_cmp);
    let median_ms = percentile(&times, 0.5);
    let p95_ms = percentile(&times, 0.95);

    // Settings are interleaved per frame so machine drift affects all of them alike.
    let settings: Vec<DetectorConfig> = (10..=100)
        .step_by(10)
        .map(|iterations| {
            let mut c = cfg.detector.clone();
            c.ransac.iterations = iterations;
            c
        })
        .collect();
    let mut samples = vec![Vec::with_capacity(flows.len() * reps); settings.len()];
    for _ in 0..reps {
        for (stem, flow) in &flows {
            for (c, out) in settings.iter().zip(samples.iter_mut()) {
                let start = Instant::now();
                let result = detect_frame(flow, c);
                out.push(start.elapsed().as_secs_f64() * 1e3);
                match result {
                    Ok(_) | Err(DetectError::FrameFailed(_)) => {}
                    Err(e) => return Err(CliError::Data(format!("frame {stem}: {e}"))),
                }
            }
        }
    }
    let iteration_table: Vec<(usize, f64)> = settings
        .iter()
        .zip(samples.iter_mut())
        .map(|(c, t)| (c.ransac.iterations, median(t)))
        .collect();
    let points: Vec<(f64, f64)> = iteration_table.iter().map(|&(i, t)| (i as f64, t)).collect();
    let (slope, intercept, r_squared) = linear_fit(&points);

    Ok(BenchReport {
        frames: flows.len(),
        repetitions: reps,
        median_ms,
        p95_ms,
        iteration_table,
        slope_ms_per_iteration: slope,
        intercept_ms: intercept,
        r_squared,
        masks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 3.0 * i as f64 + 2.0)).collect();
        let (m, b, r2) = linear_fit(&pts);
        assert!((m - 3.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_points() {
        let (_, _, r2) = linear_fit(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        assert!(r2.abs() < 1e-12);
    }

    #[test]
    fn percentiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.95), 5.0);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    }
}
