use std::fmt::Write as _;
use std::path::Path;

use flowseg::kv::{self, KvError};
use flowseg::DetectorConfig;

use crate::CliError;

/// Everything a run can tune. Every key is optional and defaults to the published settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub detector: DetectorConfig,
    /// Spacing of the success-rate curve thresholds.
    pub metric_step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            detector: DetectorConfig::default(),
            metric_step: 0.01,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let entries = kv::parse(text)?;
        kv::reject_duplicates(&entries, &[])?;
        let mut cfg = RunConfig::default();
        let d = &mut cfg.detector;
        for e in &entries {
            match e.key.as_str() {
                "interval_k" => d.interval_k = e.parse()?,
                "a1_per_frame" => d.a1_per_frame = e.parse()?,
                "a2" => d.a2 = e.parse()?,
                "t_g" => d.t_g = e.parse()?,
                "t_c" => d.t_c = e.parse()?,
                "eps_mag" => d.eps_mag = e.parse()?,
                "ransac_sample_n" => d.ransac.sample_n = e.parse()?,
                "ransac_iterations" => d.ransac.iterations = e.parse()?,
                "ransac_grid_rows" => d.ransac.grid_rows = e.parse()?,
                "ransac_grid_cols" => d.ransac.grid_cols = e.parse()?,
                "ransac_inlier_tol" => d.ransac.inlier_tol = e.parse()?,
                "ransac_eval_stride" => d.ransac.eval_stride = e.parse()?,
                "ransac_rng_seed" => d.ransac.rng_seed = e.parse()?,
                "metric_step" => cfg.metric_step = e.parse()?,
                _ => return Err(KvError::UnknownKey { line: e.line, key: e.key.clone() }.into()),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.detector
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if !(self.metric_step > 0.0 && self.metric_step <= 1.0) {
            return Err(CliError::Usage("metric_step must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text)
            }
        }
    }

    pub fn to_config_string(&self) -> String {
        let d = &self.detector;
        let r = &d.ransac;
        let mut s = String::new();
        writeln!(s, "interval_k = {}", d.interval_k).unwrap();
        writeln!(s, "a1_per_frame = {}", d.a1_per_frame).unwrap();
        writeln!(s, "a2 = {}", d.a2).unwrap();
        writeln!(s, "t_g = {}", d.t_g).unwrap();
        writeln!(s, "t_c = {}", d.t_c).unwrap();
        writeln!(s, "eps_mag = {}", d.eps_mag).unwrap();
        writeln!(s, "ransac_sample_n = {}", r.sample_n).unwrap();
        writeln!(s, "ransac_iterations = {}", r.iterations).unwrap();
        writeln!(s, "ransac_grid_rows = {}", r.grid_rows).unwrap();
        writeln!(s, "ransac_grid_cols = {}", r.grid_cols).unwrap();
        writeln!(s, "ransac_inlier_tol = {}", r.inlier_tol).unwrap();
        writeln!(s, "ransac_eval_stride = {}", r.eval_stride).unwrap();
        writeln!(s, "ransac_rng_seed = {}", r.rng_seed).unwrap();
        writeln!(s, "metric_step = {}", self.metric_step).unwrap();
        s
    }
}
