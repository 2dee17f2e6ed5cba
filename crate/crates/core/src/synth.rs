//! Synthetic flow sequences with exact ground truth.
//!
//! A scene is a camera motion, given as the per-frame homography `H(t -> t-1)`, plus rigid
//! objects that move at constant image velocity. Background pixels get the ideal flow of
//! `H(t -> t-k)`; object pixels are overwritten with the object's own displacement; Gaussian
//! noise is then added to every pixel.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::detector::ideal_background_flow;
use crate::field::{FieldError, FlowField, ForegroundMask};
use crate::homography::Homography;
use crate::io::{save_flow, save_mask};
use crate::kv::{self, KvError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scene script: {0}")]
    InvalidScript(String),
    #[error("composed homography cannot be normalized")]
    NonInvertibleComposition,
    #[error(transparent)]
    Config(#[from] KvError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraMotion {
    /// Translation part of `H(t -> t-1)`, px per frame.
    pub translation: [f64; 2],
    /// Rotation about the image center, radians per frame.
    pub rotation: f64,
    /// Scale per frame about `zoom_center`.
    pub zoom: f64,
    /// Defaults to the image center `(w/2, h/2)`.
    pub zoom_center: Option<[f64; 2]>,
}

impl Default for CameraMotion {
    fn default() -> Self {
        Self {
            translation: [0.0, 0.0],
            rotation: 0.0,
            zoom: 1.0,
            zoom_center: None,
        }
    }
}

/// Geometry at frame 0, in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Covers pixels with `x <= px < x + w` and `y <= py < y + h`.
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneObject {
    pub shape: Shape,
    /// Image-plane motion per frame; the object sits at `shape + t * velocity` in frame `t`.
    pub velocity: [f64; 2],
}

impl SceneObject {
    fn offset(&self, t: usize) -> [f64; 2] {
        [self.velocity[0] * t as f64, self.velocity[1] * t as f64]
    }

    /// Axis-aligned bounds `(x0, y0, x1, y1)` at frame `t`.
    fn bounds(&self, t: usize) -> [f64; 4] {
        let [dx, dy] = self.offset(t);
        match self.shape {
            Shape::Rect { x, y, w, h } => [x + dx, y + dy, x + dx + w, y + dy + h],
            Shape::Ellipse { cx, cy, rx, ry } => [cx + dx - rx, cy + dy - ry, cx + dx + rx, cy + dy + ry],
        }
    }

    pub fn contains(&self, t: usize, px: usize, py: usize) -> bool {
        let [dx, dy] = self.offset(t);
        let (px, py) = (px as f64, py as f64);
        match self.shape {
            Shape::Rect { x, y, w, h } => {
                let (x0, y0) = (x + dx, y + dy);
                px >= x0 && px < x0 + w && py >= y0 && py < y0 + h
            }
            Shape::Ellipse { cx, cy, rx, ry } => {
                let (ex, ey) = ((px - cx - dx) / rx, (py - cy - dy) / ry);
                ex * ex + ey * ey <= 1.0
            }
        }
    }

    /// Flow of object pixels: where they were `k` frames earlier, relative to now.
    pub fn flow(&self, interval_k: u32) -> [f64; 2] {
        let k = f64::from(interval_k);
        [-self.velocity[0] * k, -self.velocity[1] * k]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneScript {
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    pub interval_k: u32,
    pub camera: CameraMotion,
    pub objects: Vec<SceneObject>,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for SceneScript {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            num_frames: 60,
            interval_k: 5,
            camera: CameraMotion::default(),
            objects: Vec::new(),
            noise_sigma: 0.2,
            rng_seed: 0,
        }
    }
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidScript(msg.into())
}

impl SceneScript {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width < 4 || self.height < 4 {
            return Err(invalid("width and height must be at least 4"));
        }
        if self.interval_k == 0 {
            return Err(invalid("interval_k must be at least 1"));
        }
        if self.num_frames <= self.interval_k as usize {
            return Err(invalid("num_frames must exceed interval_k"));
        }
        let cam = &self.camera;
        let finite = cam.translation.iter().all(|v| v.is_finite())
            && cam.rotation.is_finite()
            && cam.zoom_center.is_none_or(|c| c.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(invalid("camera parameters must be finite"));
        }
        if !(cam.zoom > 0.0) || !cam.zoom.is_finite() {
            return Err(invalid("camera_zoom must be positive"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(invalid("noise_sigma must be non-negative"));
        }
        for (i, obj) in self.objects.iter().enumerate() {
            let positive = match obj.shape {
                Shape::Rect { w, h, .. } => w > 0.0 && h > 0.0,
                Shape::Ellipse { rx, ry, .. } => rx > 0.0 && ry > 0.0,
            };
            if !positive {
                return Err(invalid(format!("object {i} has non-positive size")));
            }
            // Motion is linear, so checking the first and last frame covers all of them.
            for t in [0, self.num_frames - 1] {
                let [x0, y0, x1, y1] = obj.bounds(t);
                let inside = [x0, y0, x1, y1].iter().all(|v| v.is_finite())
                    && x0 >= 0.0
                    && y0 >= 0.0
                    && x1 <= self.width as f64
                    && y1 <= self.height as f64;
                if !inside {
                    return Err(invalid(format!("object {i} leaves the frame at frame {t}")));
                }
            }
        }
        Ok(())
    }

    pub fn image_center(&self) -> [f64; 2] {
        [self.width as f64 / 2.0, self.height as f64 / 2.0]
    }

    pub fn zoom_center(&self) -> [f64; 2] {
        self.camera.zoom_center.unwrap_or_else(|| self.image_center())
    }

    /// `H(t -> t-1)`: zoom about the zoom center, then rotation about the image center, then
    /// translation.
    pub fn per_frame_homography(&self) -> Result<Homography, SynthError> {
        let cam = &self.camera;
        let zoom = Homography::zoom_about(cam.zoom, self.zoom_center());
        let rot = Homography::rotation_about(cam.rotation, self.image_center());
        let shift = Homography::translation(cam.translation[0], cam.translation[1]);
        shift
            .after(&rot.after(&zoom).map_err(|_| SynthError::NonInvertibleComposition)?)
            .map_err(|_| SynthError::NonInvertibleComposition)
    }

    pub fn parse(text: &str) -> Result<Self, SynthError> {
        let entries = kv::parse(text)?;
        kv::reject_duplicates(&entries, &["object"])?;
        let mut s = SceneScript::default();
        for e in &entries {
            match e.key.as_str() {
                "width" => s.width = e.parse()?,
                "height" => s.height = e.parse()?,
                "num_frames" => s.num_frames = e.parse()?,
                "interval_k" => s.interval_k = e.parse()?,
                "camera_translation" => s.camera.translation = e.parse_array()?,
                "camera_rotation" => s.camera.rotation = e.parse()?,
                "camera_zoom" => s.camera.zoom = e.parse()?,
                "zoom_center" => s.camera.zoom_center = Some(e.parse_array()?),
                "noise_sigma" => s.noise_sigma = e.parse()?,
                "rng_seed" => s.rng_seed = e.parse()?,
                "object" => {
                    let mut words = e.value.split_whitespace();
                    let kind = words.next().unwrap_or_default();
                    let nums: Vec<f64> = words
                        .map(|w| w.parse().map_err(|_| e.bad_value()))
                        .collect::<Result<_, _>>()?;
                    let [a, b, c, d, du, dv]: [f64; 6] =
                        nums.try_into().map_err(|_| e.bad_value())?;
                    let shape = match kind {
                        "rect" => Shape::Rect { x: a, y: b, w: c, h: d },
                        "ellipse" => Shape::Ellipse { cx: a, cy: b, rx: c, ry: d },
                        _ => return Err(e.bad_value().into()),
                    };
                    s.objects.push(SceneObject {
                        shape,
                        velocity: [du, dv],
                    });
                }
                _ => return Err(e.unknown().into()),
            }
        }
        s.validate()?;
        Ok(s)
    }

    /// Text form accepted by [`SceneScript::parse`]; floats use round-trip formatting.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let c = &self.camera;
        writeln!(out, "width = {}", self.width).unwrap();
        writeln!(out, "height = {}", self.height).unwrap();
        writeln!(out, "num_frames = {}", self.num_frames).unwrap();
        writeln!(out, "interval_k = {}", self.interval_k).unwrap();
        writeln!(out, "camera_translation = {} {}", c.translation[0], c.translation[1]).unwrap();
        writeln!(out, "camera_rotation = {}", c.rotation).unwrap();
        writeln!(out, "camera_zoom = {}", c.zoom).unwrap();
        if let Some([x, y]) = c.zoom_center {
            writeln!(out, "zoom_center = {x} {y}").unwrap();
        }
        writeln!(out, "noise_sigma = {}", self.noise_sigma).unwrap();
        writeln!(out, "rng_seed = {}", self.rng_seed).unwrap();
        for o in &self.objects {
            let [du, dv] = o.velocity;
            match o.shape {
                Shape::Rect { x, y, w, h } => writeln!(out, "object = rect {x} {y} {w} {h} {du} {dv}"),
                Shape::Ellipse { cx, cy, rx, ry } => {
                    writeln!(out, "object = ellipse {cx} {cy} {rx} {ry} {du} {dv}")
                }
            }
            .unwrap();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthFrame {
    /// Frame number `t`; the flow pairs frame `t` with frame `t - k`.
    pub index: usize,
    pub flow: FlowField,
    pub gt_mask: ForegroundMask,
    pub gt_homography: Homography,
}

/// Chains per-frame homographies given in temporal order `t -> t-1 -> ... -> t-k`.
pub fn compose_homographies(per_frame: &[Homography]) -> Result<Homography, SynthError> {
    let (first, rest) = per_frame
        .split_first()
        .ok_or_else(|| invalid("no homographies to compose"))?;
    rest.iter().try_fold(*first, |acc, h| {
        h.after(&acc).map_err(|_| SynthError::NonInvertibleComposition)
    })
}

/// Frame `t` of a validated script.
pub fn generate_frame(script: &SceneScript, t: usize) -> Result<GroundTruthFrame, SynthError> {
    let k = script.interval_k;
    let (w, h) = (script.width, script.height);
    let step = script.per_frame_homography()?;
    let gt_homography = compose_homographies(&vec![step; k as usize])?;
    let ideal = ideal_background_flow(&gt_homography, w, h);

    let mut rng = ChaCha8Rng::seed_from_u64(script.rng_seed);
    rng.set_stream(t as u64);
    let noise = (script.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, script.noise_sigma).expect("sigma validated"));

    let mut vectors = Vec::with_capacity(w * h);
    let mut labels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let object = script.objects.iter().rev().find(|o| o.contains(t, x, y));
            let base = match object {
                Some(o) => o.flow(k),
                None => ideal.at(x, y).ok_or(SynthError::NonInvertibleComposition)?,
            };
            let [nu, nv] = match &noise {
                Some(n) => [n.sample(&mut rng), n.sample(&mut rng)],
                None => [0.0, 0.0],
            };
            vectors.push([(base[0] + nu) as f32, (base[1] + nv) as f32]);
            labels.push(object.is_some());
        }
    }
    Ok(GroundTruthFrame {
        index: t,
        flow: FlowField::new(w, h, k, vectors)?,
        gt_mask: ForegroundMask::new(w, h, labels)?,
        gt_homography,
    })
}

/// Frames `k..num_frames`, each generated from its own seeded stream.
pub fn generate_sequence(script: &SceneScript) -> Result<Vec<GroundTruthFrame>, SynthError> {
    script.validate()?;
    (script.interval_k as usize..script.num_frames)
        .map(|t| generate_frame(script, t))
        .collect()
}

/// Writes `NNNN.flo`, `NNNN_gt.pgm`, `homographies.csv` and `script.cfg` into `dir`.
pub fn write_sequence(
    dir: &Path,
    script: &SceneScript,
    frames: &[GroundTruthFrame],
) -> Result<(), SynthError> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("frame,h11,h12,h13,h21,h22,h23,h31,h32,h33\n");
    for f in frames {
        save_flow(&dir.join(format!("{:04}.flo", f.index)), &f.flow)?;
        save_mask(&dir.join(format!("{:04}_gt.pgm", f.index)), &f.gt_mask)?;
        writeln!(csv, "{},{}", f.index, f.gt_homography.to_csv()).unwrap();
    }
    fs::write(dir.join("homographies.csv"), csv)?;
    fs::write(dir.join("script.cfg"), script.to_config_string())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composes_translations() {
        let h = compose_homographies(&[Homography::translation(1.0, 0.0); 5]).unwrap();
        assert!(h.max_abs_diff(&Homography::translation(5.0, 0.0)) < 1e-12);
        let id = compose_homographies(&[Homography::identity(); 5]).unwrap();
        assert_eq!(id, Homography::identity());
    }

    #[test]
    fn composes_zooms_about_common_center() {
        let c = [160.0, 120.0];
        let h = compose_homographies(&[Homography::zoom_about(1.02, c), Homography::zoom_about(1.03, c)])
            .unwrap();
        assert!(h.max_abs_diff(&Homography::zoom_about(1.02 * 1.03, c)) < 1e-12);
        assert!((h.get(1, 1) - 1.0506).abs() < 1e-12);
    }

    #[test]
    fn composition_is_in_temporal_order() {
        // Translate first, then scale about the origin: (p + t) * 2.
        let list = [Homography::translation(1.0, 0.0), Homography::zoom_about(2.0, [0.0, 0.0])];
        let h = compose_homographies(&list).unwrap();
        assert_eq!(h.apply(3.0, 0.0), Some([8.0, 0.0]));
    }

    #[test]
    fn empty_composition_rejected() {
        assert!(matches!(compose_homographies(&[]), Err(SynthError::InvalidScript(_))));
    }

    #[test]
    fn static_scene_is_all_zero() {
        let script = SceneScript {
            width: 32,
            height: 24,
            num_frames: 8,
            noise_sigma: 0.0,
            ..Default::default()
        };
        let frames = generate_sequence(&script).unwrap();
        assert_eq!(frames.len(), 3);
        for f in frames {
            assert!(f.flow.vectors().iter().all(|v| *v == [0.0, 0.0]));
            assert!(f.gt_mask.is_empty());
            assert_eq!(f.gt_homography, Homography::identity());
        }
    }

    #[test]
    fn translating_camera_gives_constant_flow() {
        let script = SceneScript {
            width: 40,
            height: 30,
            num_frames: 7,
            camera: CameraMotion {
                translation: [2.0, 0.0],
                ..Default::default()
            },
            noise_sigma: 0.0,
            ..Default::default()
        };
        for f in generate_sequence(&script).unwrap() {
            assert!(f.flow.vectors().iter().all(|v| *v == [10.0, 0.0]));
        }
    }

    #[test]
    fn object_pixels_and_mask_agree() {
        let script = SceneScript {
            width: 80,
            height: 60,
            num_frames: 12,
            objects: vec![SceneObject {
                shape: Shape::Rect { x: 10.5, y: 5.0, w: 20.0, h: 10.0 },
                velocity: [1.5, 1.0],
            }],
            noise_sigma: 0.0,
            ..Default::default()
        };
        for f in generate_sequence(&script).unwrap() {
            assert_eq!(f.gt_mask.foreground_count(), 200);
            for (v, &fg) in f.flow.vectors().iter().zip(f.gt_mask.labels()) {
                assert_eq!(*v, if fg { [-7.5, -5.0] } else { [0.0, 0.0] });
            }
            assert!(f.gt_mask.get(11 + (15 * f.index) / 10, 5 + f.index));
        }
    }

    #[test]
    fn later_objects_overwrite_earlier_ones() {
        let script = SceneScript {
            width: 40,
            height: 40,
            num_frames: 6,
            objects: vec![
                SceneObject { shape: Shape::Rect { x: 0.0, y: 0.0, w: 20.0, h: 20.0 }, velocity: [0.0, 0.0] },
                SceneObject { shape: Shape::Ellipse { cx: 20.0, cy: 20.0, rx: 5.0, ry: 5.0 }, velocity: [1.0, 0.0] },
            ],
            noise_sigma: 0.0,
            ..Default::default()
        };
        let f = generate_frame(&script, 5).unwrap();
        assert_eq!(f.flow.at(25, 20), [-5.0, 0.0]);
        assert_eq!(f.flow.at(5, 5), [0.0, 0.0]);
        assert!(f.gt_mask.get(5, 5) && f.gt_mask.get(25, 20));
    }

    #[test]
    fn noise_is_seeded() {
        let script = SceneScript {
            width: 16,
            height: 16,
            num_frames: 7,
            ..Default::default()
        };
        let a = generate_sequence(&script).unwrap();
        let b = generate_sequence(&script).unwrap();
        assert_eq!(a, b);
        let c = generate_sequence(&SceneScript { rng_seed: 1, ..script }).unwrap();
        assert_ne!(a[0].flow, c[0].flow);
        assert_ne!(a[0].flow, a[1].flow);
    }

    #[test]
    fn validation() {
        let ok = SceneScript::default();
        assert!(ok.validate().is_ok());
        let leaving = SceneScript {
            objects: vec![SceneObject {
                shape: Shape::Rect { x: 300.0, y: 10.0, w: 10.0, h: 10.0 },
                velocity: [1.0, 0.0],
            }],
            ..ok.clone()
        };
        assert!(matches!(leaving.validate(), Err(SynthError::InvalidScript(_))));
        let short = SceneScript { num_frames: 5, ..ok.clone() };
        assert!(short.validate().is_err());
        let bad_zoom = SceneScript {
            camera: CameraMotion { zoom: 0.0, ..Default::default() },
            ..ok
        };
        assert!(bad_zoom.validate().is_err());
    }

    #[test]
    fn parse_and_echo() {
        let text = "\
# demo
width = 64
height = 48
num_frames = 10
camera_translation = 0.5 -0.25
camera_zoom = 1.01
zoom_center = 30 20
noise_sigma = 0.1
object = rect 5 6 10 8 0.3 0.1
object = ellipse 40 30 4 3 -0.2 0.3
";
        let s = SceneScript::parse(text).unwrap();
        assert_eq!(s.width, 64);
        assert_eq!(s.camera.translation, [0.5, -0.25]);
        assert_eq!(s.camera.zoom_center, Some([30.0, 20.0]));
        assert_eq!(s.objects.len(), 2);
        assert_eq!(SceneScript::parse(&s.to_config_string()).unwrap(), s);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            SceneScript::parse("colour = red"),
            Err(SynthError::Config(KvError::UnknownKey { .. }))
        ));
        assert!(matches!(
            SceneScript::parse("object = triangle 1 2 3 4 5 6"),
            Err(SynthError::Config(KvError::BadValue { .. }))
        ));
        assert!(matches!(
            SceneScript::parse("width = 10\nwidth = 12"),
            Err(SynthError::Config(KvError::DuplicateKey { .. }))
        ));
    }
}
