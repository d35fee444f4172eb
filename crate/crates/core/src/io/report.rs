//! Report rendering. Text reports are `key = value` lines; JSON reports carry
//! the same fields. Both echo the fully resolved config for provenance.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::metrics::EvalReport;
use crate::pipeline::{Aggregate, RefineReport};
use crate::scalar::Scalar;

use super::{write_atomic, RunConfig};

fn opt<T: Scalar>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn num<T: Scalar>(v: T) -> Value {
    Value::from(v.to_f64_lossy())
}

fn config_echo<T: Scalar>(out: &mut String, cfg: &RunConfig<T>) {
    for (k, v) in cfg.entries() {
        let _ = writeln!(out, "config.{k} = {v}");
    }
}

fn config_json<T: Scalar>(cfg: &RunConfig<T>) -> Value {
    let mut m = Map::new();
    for (k, v) in cfg.entries() {
        let val = if k == "radius_sweep" {
            Value::Array(v.split(',').filter_map(|s| s.parse::<f64>().ok()).map(Value::from).collect())
        } else if let Ok(x) = v.parse::<f64>() {
            Value::from(x)
        } else {
            Value::from(v)
        };
        m.insert(k.to_string(), val);
    }
    Value::Object(m)
}

pub fn eval_report_text<T: Scalar>(r: &EvalReport<T>, cfg: &RunConfig<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "radius = {}", r.radius);
    let _ = writeln!(out, "e_rms_cm = {}", r.e_rms_cm);
    let _ = writeln!(out, "r_covered_pct = {}", r.r_covered_pct);
    let _ = writeln!(out, "r_l = {}", opt(r.r_l));
    let _ = writeln!(out, "score = {}", opt(r.score));
    let _ = writeln!(out, "covered_total = {}", r.covered_total);
    let _ = writeln!(out, "cloud_total = {}", r.cloud_total);
    let _ = writeln!(out, "segment_count = {}", r.segment_count);
    let _ = writeln!(out, "total_length = {}", r.total_length);
    config_echo(&mut out, cfg);
    out
}

pub fn eval_report_json<T: Scalar>(r: &EvalReport<T>, cfg: &RunConfig<T>) -> String {
    let per_segment: Vec<Value> = r
        .per_segment
        .iter()
        .map(|s| json!({ "covered": s.covered_count, "density": num(s.density), "e_rms": num(s.e_rms) }))
        .collect();
    let v = json!({
        "radius": num(r.radius),
        "e_rms_cm": num(r.e_rms_cm),
        "r_covered_pct": num(r.r_covered_pct),
        "r_l": r.r_l.map(num),
        "score": r.score.map(num),
        "covered_total": r.covered_total,
        "cloud_total": r.cloud_total,
        "segment_count": r.segment_count,
        "total_length": num(r.total_length),
        "per_segment": per_segment,
        "config": config_json(cfg),
    });
    serde_json::to_string_pretty(&v).expect("JSON values always serialize") + "\n"
}

fn aggregate_text<T: Scalar>(out: &mut String, prefix: &str, a: &Aggregate<T>) {
    let _ = writeln!(out, "{prefix}.segment_count = {}", a.segment_count);
    let _ = writeln!(out, "{prefix}.total_length = {}", a.total_length);
    let _ = writeln!(out, "{prefix}.covered_sum = {}", a.covered_sum);
    let _ = writeln!(out, "{prefix}.mean_density = {}", a.mean_density);
    let _ = writeln!(out, "{prefix}.mean_e_rms = {}", a.mean_e_rms);
}

fn aggregate_json<T: Scalar>(a: &Aggregate<T>) -> Value {
    json!({
        "segment_count": a.segment_count,
        "total_length": num(a.total_length),
        "covered_sum": a.covered_sum,
        "mean_density": num(a.mean_density),
        "mean_e_rms": num(a.mean_e_rms),
    })
}

pub fn refine_report_text<T: Scalar>(r: &RefineReport<T>, cfg: &RunConfig<T>) -> String {
    let mut out = String::new();
    for s in &r.stages {
        let _ = writeln!(out, "stage.{}.in = {}", s.stage, s.input);
        let _ = writeln!(out, "stage.{}.out = {}", s.stage, s.output);
    }
    let counters = [
        ("indexed_points", r.indexed_points),
        ("dropped_points", r.dropped_points),
        ("translated", r.translated),
        ("cropped", r.cropped),
        ("crop_flagged", r.crop_flagged),
        ("removed_outliers", r.removed_outliers),
        ("clusters", r.clusters),
        ("multi_member_clusters", r.multi_member_clusters),
        ("merges", r.merges),
        ("merges_moved", r.merges_moved),
        ("joins", r.joins),
        ("sweeps", r.sweeps),
    ];
    for (k, v) in counters {
        let _ = writeln!(out, "{k} = {v}");
    }
    let _ = writeln!(out, "density_threshold = {}", r.density_threshold);
    aggregate_text(&mut out, "before", &r.before);
    aggregate_text(&mut out, "after", &r.after);
    config_echo(&mut out, cfg);
    out
}

pub fn refine_report_json<T: Scalar>(r: &RefineReport<T>, cfg: &RunConfig<T>) -> String {
    let stages: Vec<Value> = r
        .stages
        .iter()
        .map(|s| json!({ "stage": s.stage, "in": s.input, "out": s.output }))
        .collect();
    let v = json!({
        "stages": stages,
        "indexed_points": r.indexed_points,
        "dropped_points": r.dropped_points,
        "translated": r.translated,
        "cropped": r.cropped,
        "crop_flagged": r.crop_flagged,
        "density_threshold": num(r.density_threshold),
        "removed_outliers": r.removed_outliers,
        "clusters": r.clusters,
        "multi_member_clusters": r.multi_member_clusters,
        "merges": r.merges,
        "merges_moved": r.merges_moved,
        "joins": r.joins,
        "sweeps": r.sweeps,
        "before": aggregate_json(&r.before),
        "after": aggregate_json(&r.after),
        "config": config_json(cfg),
    });
    serde_json::to_string_pretty(&v).expect("JSON values always serialize") + "\n"
}

pub fn save_report(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    write_atomic(path.as_ref(), contents.as_bytes())
}
