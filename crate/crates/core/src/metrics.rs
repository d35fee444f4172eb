//! Scene-level representation metrics: pooled RMS error, coverage ratio,
//! length-per-log-count and the composite score, plus radius sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, Aabb, Cylinder, Segment};
use crate::pipeline::SegmentStats;
use crate::scalar::Scalar;
use crate::spatial_index::{GaussianCloud, Octree};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    /// Cylinder radius of the evaluation, meters.
    pub eval_radius: T,
    /// Multiplier of the composite score.
    pub score_scaler: T,
    /// Radii of a sweep, strictly increasing.
    pub radius_sweep: Vec<T>,
    /// Padding of the reference segment bounds that selects the evaluated
    /// points, meters.
    pub bbox_margin: T,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            eval_radius: T::lit(0.10),
            score_scaler: T::one(),
            radius_sweep: [0.01, 0.02, 0.05, 0.10].iter().map(|&r| T::lit(r)).collect(),
            bbox_margin: T::lit(0.10),
        }
    }
}

impl<T: Scalar> EvalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let invalid = |key: &str, reason: &str| Error::InvalidConfig { key: key.into(), reason: reason.into() };
        if !(self.eval_radius.is_finite() && self.eval_radius > T::zero()) {
            return Err(invalid("eval_radius", "must be > 0"));
        }
        if !(self.score_scaler.is_finite() && self.score_scaler > T::zero()) {
            return Err(invalid("score_scaler", "must be > 0"));
        }
        if self.radius_sweep.is_empty() {
            return Err(invalid("radius_sweep", "needs at least one radius"));
        }
        if self.radius_sweep.iter().any(|r| !(r.is_finite() && *r > T::zero())) {
            return Err(invalid("radius_sweep", "radii must be > 0"));
        }
        if self.radius_sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("radius_sweep", "radii must be strictly increasing"));
        }
        if !(self.bbox_margin.is_finite() && self.bbox_margin >= T::zero()) {
            return Err(invalid("bbox_margin", "must be >= 0"));
        }
        Ok(())
    }

    /// Evaluation box: reference segment bounds padded by the margin.
    pub fn bbox_for(&self, reference: &[Segment<T>]) -> Result<Aabb<T>> {
        let bb = Aabb::from_segments(reference).ok_or(Error::NothingToEvaluate)?;
        let bb = bb.padded(self.bbox_margin);
        if bb.is_valid() {
            Ok(bb)
        } else {
            Err(Error::DegenerateBoundingBox)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    pub radius: T,
    /// Pooled RMS distance of covered points to their nearest covering
    /// segment, centimeters.
    pub e_rms_cm: T,
    /// Percentage of indexed points covered by at least one segment.
    pub r_covered_pct: T,
    /// Total length over the natural log of summed per-segment counts;
    /// absent when that sum is at most one.
    pub r_l: Option<T>,
    /// Composite score; absent when either log factor is not positive.
    pub score: Option<T>,
    pub per_segment: Vec<SegmentStats<T>>,
    pub covered_total: usize,
    pub cloud_total: usize,
    pub segment_count: usize,
    pub total_length: T,
}

/// Composite score `λ · coverage / (ln(1 + e_rms_cm) · ln(1 + r_l))`;
/// `None` when the denominator is not positive.
pub fn score<T: Scalar>(scaler: T, r_covered_pct: T, e_rms_cm: T, r_l: T) -> Option<T> {
    let le = e_rms_cm.ln_1p();
    let ll = r_l.ln_1p();
    (le > T::zero() && ll > T::zero()).then(|| scaler * r_covered_pct / (le * ll))
}

/// Total length over the natural log of the summed covered counts.
pub fn length_ratio<T: Scalar>(total_length: T, covered_sum: usize) -> Option<T> {
    (covered_sum > 1).then(|| total_length / T::from_usize_lossy(covered_sum).ln())
}

/// Assembles a report from per-point nearest distances (indexed by covered
/// point, in ascending cloud index order) and per-segment statistics.
pub(crate) fn assemble<T: Scalar>(
    segments: &[Segment<T>],
    per_segment: Vec<SegmentStats<T>>,
    nearest: &[T],
    cloud_total: usize,
    radius: T,
    scaler: T,
) -> EvalReport<T> {
    let covered_total = nearest.len();
    let e_rms = if covered_total == 0 {
        T::zero()
    } else {
        (nearest.iter().map(|d| *d * *d).sum::<T>() / T::from_usize_lossy(covered_total)).sqrt()
    };
    let e_rms_cm = e_rms * T::lit(100.0);
    let r_covered_pct = if cloud_total == 0 {
        T::zero()
    } else {
        T::lit(100.0) * T::from_usize_lossy(covered_total) / T::from_usize_lossy(cloud_total)
    };
    let total_length: T = segments.iter().map(|s| s.length()).sum();
    let covered_sum: usize = per_segment.iter().map(|s| s.covered_count).sum();
    let r_l = length_ratio(total_length, covered_sum);
    let score = r_l.and_then(|rl| score(scaler, r_covered_pct, e_rms_cm, rl));
    EvalReport {
        radius,
        e_rms_cm,
        r_covered_pct,
        r_l,
        score,
        per_segment,
        covered_total,
        cloud_total,
        segment_count: segments.len(),
        total_length,
    }
}

/// Evaluates `segments` against the points indexed by `tree` at `radius`.
pub fn evaluate_at<T: Scalar>(
    segments: &[Segment<T>],
    tree: &Octree<T>,
    radius: T,
    scaler: T,
) -> Result<EvalReport<T>> {
    if segments.is_empty() {
        return Err(Error::NothingToEvaluate);
    }
    let hits: Vec<Vec<(usize, T)>> = segments
        .par_iter()
        .map(|s| {
            let c = Cylinder::new(*s, radius).expect("radius validated positive");
            let mut v = Vec::new();
            tree.visit_cylinder(&c, |i, p| v.push((i, point_segment_distance(p, s))));
            v.sort_unstable_by_key(|&(i, _)| i);
            v
        })
        .collect();

    let per_segment = segments
        .iter()
        .zip(&hits)
        .map(|(s, h)| {
            let n = h.len();
            let e = if n == 0 {
                T::zero()
            } else {
                (h.iter().map(|(_, d)| *d * *d).sum::<T>() / T::from_usize_lossy(n)).sqrt()
            };
            SegmentStats { covered_count: n, density: T::from_usize_lossy(n) / s.length(), e_rms: e }
        })
        .collect();

    let mut pooled: Vec<(usize, T)> = hits.into_iter().flatten().collect();
    pooled.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).expect("finite distance")));
    pooled.dedup_by_key(|(i, _)| *i);
    let nearest: Vec<T> = pooled.into_iter().map(|(_, d)| d).collect();

    Ok(assemble(segments, per_segment, &nearest, tree.indexed_len(), radius, scaler))
}

/// Evaluates at the configured radius over a tree built on the evaluation box.
pub fn evaluate<T: Scalar>(segments: &[Segment<T>], tree: &Octree<T>, ecfg: &EvalConfig<T>) -> Result<EvalReport<T>> {
    ecfg.validate()?;
    evaluate_at(segments, tree, ecfg.eval_radius, ecfg.score_scaler)
}

/// One report per sweep radius over a shared tree on `bbox`.
pub fn radius_sweep<T: Scalar>(
    segments: &[Segment<T>],
    cloud: &GaussianCloud<T>,
    bbox: Aabb<T>,
    ecfg: &EvalConfig<T>,
) -> Result<Vec<EvalReport<T>>> {
    ecfg.validate()?;
    if segments.is_empty() {
        return Err(Error::NothingToEvaluate);
    }
    let tree = Octree::with_defaults(cloud, bbox)?;
    let reports: Vec<EvalReport<T>> = ecfg
        .radius_sweep
        .par_iter()
        .map(|&r| evaluate_at(segments, &tree, r, ecfg.score_scaler))
        .collect::<Result<_>>()?;
    debug_assert!(reports.windows(2).all(|w| w[1].r_covered_pct >= w[0].r_covered_pct));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment<f64> {
        Segment::new(Point3::new(a[0], a[1], a[2]), Point3::new(b[0], b[1], b[2])).unwrap()
    }

    #[test]
    fn score_example() {
        let s = score(1.0, 50.0, 5.0, 10.0).unwrap();
        let expect = 50.0 / (6.0f64.ln() * 11.0f64.ln());
        assert!((s - expect).abs() < 1e-12);
        assert!((s - 11.638).abs() < 1e-3);
        assert_eq!(score(1.0, 50.0, 0.0, 10.0), None);
    }

    #[test]
    fn length_ratio_example() {
        let rl = length_ratio(2.0, 100).unwrap();
        assert!((rl - 2.0 / 100.0f64.ln()).abs() < 1e-15);
        assert!((rl - std::f64::consts::LOG10_E).abs() < 1e-12);
        assert_eq!(length_ratio(2.0, 1), None);
        assert_eq!(length_ratio(2.0, 0), None);
    }

    #[test]
    fn score_monotonicity() {
        let base = score(1.0, 40.0, 3.0, 2.0).unwrap();
        assert!(score(1.0, 41.0, 3.0, 2.0).unwrap() > base);
        assert!(score(1.0, 40.0, 3.5, 2.0).unwrap() < base);
        assert!(score(1.0, 40.0, 3.0, 2.5).unwrap() < base);
    }

    #[test]
    fn full_coverage_on_axis() {
        let segs = [seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]), seg([0.0, 1.0, 0.0], [1.0, 1.0, 0.0])];
        let pts: Vec<_> = (0..50)
            .flat_map(|i| {
                let x = (i as f64 + 0.5) / 50.0;
                [Point3::new(x, 0.0, 0.0), Point3::new(x, 1.0, 0.0)]
            })
            .collect();
        let cloud = GaussianCloud::new(pts);
        let ecfg = EvalConfig::default();
        let tree = Octree::with_defaults(&cloud, ecfg.bbox_for(&segs).unwrap()).unwrap();
        let rep = evaluate(&segs, &tree, &ecfg).unwrap();
        assert_eq!(rep.e_rms_cm, 0.0);
        assert_eq!(rep.r_covered_pct, 100.0);
        assert_eq!(rep.covered_total, 100);
        assert!((rep.r_l.unwrap() - 2.0 / 100.0f64.ln()).abs() < 1e-12);
        assert_eq!(rep.score, None);
    }

    #[test]
    fn nearest_segment_pooling() {
        // The point is 0.02 from one segment and 0.05 from the other.
        let segs = [seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]), seg([0.0, 0.07, 0.0], [1.0, 0.07, 0.0])];
        let cloud = GaussianCloud::new(vec![Point3::new(0.5, 0.02, 0.0), Point3::new(0.5, 0.5, 0.5)]);
        let ecfg = EvalConfig::default();
        let tree = Octree::with_defaults(&cloud, ecfg.bbox_for(&segs).unwrap()).unwrap();
        let rep = evaluate(&segs, &tree, &ecfg).unwrap();
        assert_eq!(rep.covered_total, 1);
        assert_eq!(rep.cloud_total, 1);
        assert!((rep.e_rms_cm - 2.0).abs() < 1e-9);
        assert_eq!(rep.per_segment[0].covered_count + rep.per_segment[1].covered_count, 2);
    }

    #[test]
    fn no_segments_errors() {
        let cloud = GaussianCloud::new(vec![Point3::new(0.5, 0.0, 0.0)]);
        let bb = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0));
        let tree = Octree::with_defaults(&cloud, bb).unwrap();
        assert!(matches!(evaluate(&[], &tree, &EvalConfig::default()), Err(Error::NothingToEvaluate)));
    }

    #[test]
    fn sweep_config_validation() {
        let mut e = EvalConfig::<f64>::default();
        e.validate().unwrap();
        e.radius_sweep = vec![0.05, 0.05];
        assert!(e.validate().is_err());
        e.radius_sweep = vec![];
        assert!(e.validate().is_err());
    }
}
