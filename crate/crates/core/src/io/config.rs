//! Line-oriented `key = value` run configuration covering every pipeline
//! and evaluation tunable. Absent keys keep their defaults; unknown keys are
//! rejected; when a key repeats, the last value wins.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::EvalConfig;
use crate::pipeline::PipelineConfig;
use crate::scalar::Scalar;

use super::read_file;

/// Canonical keys, in rendering order.
pub const CONFIG_KEYS: &[&str] = &[
    "working_radius",
    "outlier_scaler",
    "similarity_weight",
    "cluster_c",
    "crop_max_iters",
    "crop_min_interval",
    "crop_window_fraction",
    "crop_density_ratio",
    "merge_gap_density_factor",
    "merge_max_sweeps",
    "overlap_semantics",
    "similarity_branch",
    "octree_depth",
    "leaf_capacity",
    "eval_radius",
    "score_scaler",
    "radius_sweep",
    "bbox_margin",
];

/// Short symbolic names accepted in place of the canonical keys.
const ALIASES: &[(&str, &str)] = &[
    ("r", "working_radius"),
    ("xi", "outlier_scaler"),
    ("lambda_sim", "similarity_weight"),
    ("alpha", "crop_density_ratio"),
    ("lambda", "score_scaler"),
];

fn canonical(key: &str) -> Option<&'static str> {
    CONFIG_KEYS
        .iter()
        .copied()
        .find(|k| *k == key)
        .or_else(|| ALIASES.iter().find(|(a, _)| *a == key).map(|(_, k)| *k))
}

fn valid_keys() -> Vec<String> {
    CONFIG_KEYS
        .iter()
        .map(|k| k.to_string())
        .chain(ALIASES.iter().map(|(a, k)| format!("{a} (= {k})")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub pipeline: PipelineConfig<T>,
    pub eval: EvalConfig<T>,
}

impl<T: Scalar> Default for RunConfig<T> {
    fn default() -> Self {
        Self { pipeline: PipelineConfig::default(), eval: EvalConfig::default() }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig { key: key.to_string(), reason: reason.into() }
}

fn num<T: Scalar>(key: &str, v: &str) -> Result<T> {
    let x: T = v.parse().map_err(|_| bad(key, format!("`{v}` is not a number")))?;
    if x.is_nan() {
        return Err(bad(key, "NaN is not allowed"));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| bad(key, format!("`{v}` is not a non-negative integer")))
}

impl<T: Scalar> RunConfig<T> {
    /// Set one key (canonical or alias) without validating the whole config.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let v = value.trim();
        let k = canonical(key).ok_or_else(|| Error::UnknownConfigKey { key: key.to_string(), valid: valid_keys() })?;
        let p = &mut self.pipeline;
        let e = &mut self.eval;
        match k {
            "working_radius" => p.working_radius = num(k, v)?,
            "outlier_scaler" => p.outlier_scaler = num(k, v)?,
            "similarity_weight" => {
                p.similarity_weight = if v == "auto" { None } else { Some(num(k, v)?) };
            }
            "cluster_c" => p.cluster_c = num(k, v)?,
            "crop_max_iters" => p.crop_max_iters = count(k, v)?,
            "crop_min_interval" => p.crop_min_interval = num(k, v)?,
            "crop_window_fraction" => p.crop_window_fraction = num(k, v)?,
            "crop_density_ratio" => p.crop_density_ratio = num(k, v)?,
            "merge_gap_density_factor" => p.merge_gap_density_factor = num(k, v)?,
            "merge_max_sweeps" => p.merge_max_sweeps = count(k, v)?,
            "overlap_semantics" => p.overlap_semantics = v.parse().map_err(|r: String| bad(k, r))?,
            "similarity_branch" => p.similarity_branch = v.parse().map_err(|r: String| bad(k, r))?,
            "octree_depth" => p.octree_depth = count(k, v)?,
            "leaf_capacity" => p.leaf_capacity = count(k, v)?,
            "eval_radius" => e.eval_radius = num(k, v)?,
            "score_scaler" => e.score_scaler = num(k, v)?,
            "radius_sweep" => {
                e.radius_sweep = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(k, s))
                    .collect::<Result<_>>()?;
            }
            "bbox_margin" => e.bbox_margin = num(k, v)?,
            _ => unreachable!("key table and match arms disagree on `{k}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.eval.validate()
    }

    /// Parse a config file body. `origin` names the source in errors.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                reason: "expected `key = value`".into(),
            })?;
            cfg.apply(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = read_file(path)?;
        Self::parse(&String::from_utf8_lossy(&bytes), &path.display().to_string())
    }

    /// Every key with its resolved value, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.pipeline;
        let e = &self.eval;
        let sweep = e.radius_sweep.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
        vec![
            ("working_radius", p.working_radius.to_string()),
            ("outlier_scaler", p.outlier_scaler.to_string()),
            ("similarity_weight", p.similarity_weight.map_or_else(|| "auto".to_string(), |w| w.to_string())),
            ("cluster_c", p.cluster_c.to_string()),
            ("crop_max_iters", p.crop_max_iters.to_string()),
            ("crop_min_interval", p.crop_min_interval.to_string()),
            ("crop_window_fraction", p.crop_window_fraction.to_string()),
            ("crop_density_ratio", p.crop_density_ratio.to_string()),
            ("merge_gap_density_factor", p.merge_gap_density_factor.to_string()),
            ("merge_max_sweeps", p.merge_max_sweeps.to_string()),
            ("overlap_semantics", p.overlap_semantics.as_str().to_string()),
            ("similarity_branch", p.similarity_branch.as_str().to_string()),
            ("octree_depth", p.octree_depth.to_string()),
            ("leaf_capacity", p.leaf_capacity.to_string()),
            ("eval_radius", e.eval_radius.to_string()),
            ("score_scaler", e.score_scaler.to_string()),
            ("radius_sweep", sweep),
            ("bbox_margin", e.bbox_margin.to_string()),
        ]
    }

    /// Config file text that parses back to `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
