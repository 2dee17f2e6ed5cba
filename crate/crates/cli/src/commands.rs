use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use flowseg::io::{encode_mask, load_flow, load_mask};
use flowseg::metrics::{
    frame_score, pooled_score, success_rate_curve, threshold_grid, video_f_measure, FrameScore,
    SrCurve,
};
use flowseg::synth::{generate_sequence, write_sequence, SceneScript, SynthError};
use flowseg::{detect_frame, DetectError, FlowField, ForegroundMask, FrameDetection};
use rayon::prelude::*;

use crate::{file_stem, list_files, write_file, CliError, RunConfig};

pub const TELEMETRY_HEADER: &str = "frame,h11,h12,h13,h21,h22,h23,h31,h32,h33,mode,vp_x,vp_y,magnitude_gradient,threshold_used,foreground_pixels";

#[derive(Clone, Debug, PartialEq)]
pub struct DetectSummary {
    pub frames: usize,
    /// Stems of frames whose homography could not be estimated.
    pub failed: Vec<String>,
}

/// Loads every `*.flo` in `dir` in name order.
pub(crate) fn load_flows(dir: &Path, interval_k: u32) -> Result<Vec<(String, FlowField)>, CliError> {
    let paths = list_files(dir, "flo")?;
    if paths.is_empty() {
        return Err(CliError::Data(format!("no flow files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let flow = load_flow(p, interval_k)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            Ok((file_stem(p), flow))
        })
        .collect()
}

fn telemetry_row(stem: &str, det: &FrameDetection) -> String {
    let (vx, vy) = match det.mode.vanishing_point {
        Some([x, y]) => (x.to_string(), y.to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "{stem},{},{},{vx},{vy},{},{},{}\n",
        det.homography.to_csv(),
        det.mode.mode.as_str(),
        det.mode.magnitude_gradient,
        det.threshold_used,
        det.mask.foreground_count()
    )
}

fn failed_row(stem: &str) -> String {
    format!("{stem}{}failed,,,,,0\n", ",".repeat(10))
}

pub fn run_detect(flow_dir: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<DetectSummary, CliError> {
    let flows = load_flows(flow_dir, cfg.detector.interval_k)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;

    let results: Vec<Result<FrameDetection, DetectError>> = flows
        .par_iter()
        .map(|(_, flow)| detect_frame(flow, &cfg.detector))
        .collect();

    let mut telemetry = format!("{TELEMETRY_HEADER}\n");
    let mut failed = Vec::new();
    for ((stem, flow), result) in flows.iter().zip(results) {
        let mask = match result {
            Ok(det) => {
                telemetry.push_str(&telemetry_row(stem, &det));
                det.mask
            }
            Err(DetectError::FrameFailed(e)) => {
                eprintln!("frame {stem} failed: {e}");
                telemetry.push_str(&failed_row(stem));
                failed.push(stem.clone());
                ForegroundMask::background(flow.width(), flow.height())
            }
            Err(e) => return Err(CliError::Data(format!("frame {stem}: {e}"))),
        };
        write_file(&out_dir.join(format!("{stem}.pgm")), encode_mask(&mask))?;
    }
    write_file(&out_dir.join("telemetry.csv"), telemetry)?;
    Ok(DetectSummary {
        frames: flows.len(),
        failed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub scores: Vec<FrameScore>,
    pub video_f_measure: f64,
    pub pooled_f_measure: f64,
    pub curve: SrCurve,
}

fn load_masks(dir: &Path) -> Result<Vec<(String, ForegroundMask)>, CliError> {
    list_files(dir, "pgm")?
        .iter()
        .map(|p| {
            let m = load_mask(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            Ok((file_stem(p), m))
        })
        .collect()
}

/// Pairs predicted and ground-truth masks by name order.
pub fn run_eval(
    pred_dir: &Path,
    gt_dir: &Path,
    report_path: &Path,
    curve_path: &Path,
    cfg: &RunConfig,
) -> Result<EvalSummary, CliError> {
    let pred = load_masks(pred_dir)?;
    let gt = load_masks(gt_dir)?;
    if pred.is_empty() {
        return Err(CliError::Data(format!("no masks in {}", pred_dir.display())));
    }
    if pred.len() != gt.len() {
        return Err(CliError::Data(format!(
            "{} predicted masks but {} ground-truth masks",
            pred.len(),
            gt.len()
        )));
    }
    let mut scores = Vec::with_capacity(pred.len());
    for ((stem, p), (_, g)) in pred.iter().zip(&gt) {
        scores.push(frame_score(p, g).map_err(|e| CliError::Data(format!("frame {stem}: {e}")))?);
    }
    let data_err = |e: flowseg::metrics::MetricsError| CliError::Data(e.to_string());
    let video = video_f_measure(&scores).map_err(data_err)?;
    let pooled = pooled_score(&scores).map_err(data_err)?;
    let fm: Vec<f64> = scores.iter().map(|s| s.f_measure).collect();
    let grid = threshold_grid(cfg.metric_step).map_err(|e| CliError::Usage(e.to_string()))?;
    let curve = success_rate_curve(&fm, &grid).map_err(data_err)?;

    let mut report =
        String::from("frame,tp,fp,fn,tn,precision,recall,f_measure,empty_gt,pooled_f_measure\n");
    for ((stem, _), s) in pred.iter().zip(&scores) {
        writeln!(
            report,
            "{stem},{},{},{},{},{:.6},{:.6},{:.6},{},",
            s.tp,
            s.fp,
            s.fn_,
            s.tn,
            s.precision,
            s.recall,
            s.f_measure,
            u8::from(s.gt_empty())
        )
        .unwrap();
    }
    let n = scores.len() as f64;
    let mean_pr = scores.iter().map(|s| s.precision).sum::<f64>() / n;
    let mean_re = scores.iter().map(|s| s.recall).sum::<f64>() / n;
    writeln!(
        report,
        "summary,{},{},{},{},{mean_pr:.6},{mean_re:.6},{video:.6},{},{:.6}",
        pooled.tp,
        pooled.fp,
        pooled.fn_,
        pooled.tn,
        scores.iter().filter(|s| s.gt_empty()).count(),
        pooled.f_measure
    )
    .unwrap();
    write_file(report_path, report)?;

    let mut csv = String::from("t_fm,success_rate\n");
    for (t, r) in curve.thresholds.iter().zip(&curve.rates) {
        writeln!(csv, "{t:.4},{r:.6}").unwrap();
    }
    write_file(curve_path, csv)?;

    Ok(EvalSummary {
        scores,
        video_f_measure: video,
        pooled_f_measure: pooled.f_measure,
        curve,
    })
}

/// Returns the number of frames written.
pub fn run_synth(script_path: &Path, out_dir: &Path) -> Result<usize, CliError> {
    let text = fs::read_to_string(script_path)
        .map_err(|e| CliError::Usage(format!("cannot read script {}: {e}", script_path.display())))?;
    let script = SceneScript::parse(&text).map_err(synth_error)?;
    let frames = generate_sequence(&script).map_err(synth_error)?;
    write_sequence(out_dir, &script, &frames).map_err(synth_error)?;
    Ok(frames.len())
}

fn synth_error(e: SynthError) -> CliError {
    match e {
        SynthError::InvalidScript(_) | SynthError::Config(_) | SynthError::NonInvertibleComposition => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}
