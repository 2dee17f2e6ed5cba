use super::background::BackgroundFlow;
use super::{DetectError, DetectorConfig};
use crate::field::{FlowField, ForegroundMask};
use crate::homography::Homography;

/// Magnitude threshold `a1 + a2 * |(h13, h23)|`, with `a1 = a1_per_frame * k`.
///
/// The static term absorbs flow noise; the dynamic term grows with camera speed.
pub fn adaptive_threshold(h: &Homography, cfg: &DetectorConfig) -> f64 {
    cfg.a1_per_frame * f64::from(cfg.interval_k) + cfg.a2 * h.get(1, 3).hypot(h.get(2, 3))
}

fn check_shape(flow: &FlowField, ideal: &BackgroundFlow) -> Result<(), DetectError> {
    if ideal.same_shape(flow) {
        Ok(())
    } else {
        Err(DetectError::DimensionMismatch {
            flow: (flow.width(), flow.height()),
            ideal: (ideal.width(), ideal.height()),
        })
    }
}

#[inline]
fn difference_norm(f: [f32; 2], ideal: [f64; 2]) -> f64 {
    (f64::from(f[0]) - ideal[0]).hypot(f64::from(f[1]) - ideal[1])
}

/// Foreground where `|f - f_ideal| > t_a`.
pub fn magnitude_mask(
    flow: &FlowField,
    ideal: &BackgroundFlow,
    t_a: f64,
) -> Result<ForegroundMask, DetectError> {
    check_shape(flow, ideal)?;
    let labels = flow
        .vectors()
        .iter()
        .zip(ideal.vectors())
        .map(|(&f, g)| g.is_some_and(|g| difference_norm(f, g) > t_a))
        .collect();
    Ok(ForegroundMask::new(flow.width(), flow.height(), labels)?)
}

/// Foreground where `cos(f, f_ideal) < t_c`.
///
/// Where either vector is shorter than `eps_mag` the direction is meaningless, and the pixel
/// falls back to the magnitude rule with threshold `t_a`.
pub fn cosine_mask(
    flow: &FlowField,
    ideal: &BackgroundFlow,
    t_c: f64,
    eps_mag: f64,
    t_a: f64,
) -> Result<ForegroundMask, DetectError> {
    check_shape(flow, ideal)?;
    let labels = flow
        .vectors()
        .iter()
        .zip(ideal.vectors())
        .map(|(&f, g)| {
            let Some(g) = *g else { return false };
            let (fu, fv) = (f64::from(f[0]), f64::from(f[1]));
            let fm = fu.hypot(fv);
            let gm = g[0].hypot(g[1]);
            if fm < eps_mag || gm < eps_mag {
                difference_norm(f, g) > t_a
            } else {
                (fu * g[0] + fv * g[1]) / (fm * gm) < t_c
            }
        })
        .collect();
    Ok(ForegroundMask::new(flow.width(), flow.height(), labels)?)
}
