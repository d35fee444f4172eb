//! Pairwise consolidation inside a cluster: merging overlapping duplicates
//! and joining collinear pieces separated by a populated gap.

use crate::geom::{closest_points, perpendicular_offset, Point3, Segment, MIN_SEGMENT_LENGTH};
use crate::scalar::Scalar;
use crate::spatial_index::Octree;

use super::stats::{density, segment_stats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeParams<T> {
    pub radius: T,
    /// Global outlier density threshold of the current run.
    pub density_threshold: T,
    /// A gap is populated when its density reaches this factor times the
    /// density threshold.
    pub gap_density_factor: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MergeOutcome<T> {
    /// The shorter segment is consumed; `segment` replaces the longer one.
    /// `moved` tells whether the shifted candidate won.
    Merged { segment: Segment<T>, moved: bool },
    /// The gap between the two was empty; nothing changes.
    KeptBoth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JoinOutcome<T> {
    /// Both inputs are replaced by the spanning segment.
    Joined(Segment<T>),
    KeptBoth,
}

/// Density test on the interior of the gap from `p` to `q`.
///
/// Gaps no longer than the radius put each segment inside the other's
/// cylinder and always pass. Longer gaps have each end trimmed by
/// `min(radius, length / 4)` so the points around the two segments' own ends
/// do not count as gap content.
fn gap_is_populated<T: Scalar>(p: Point3<T>, q: Point3<T>, tree: &Octree<T>, params: &MergeParams<T>) -> bool {
    let len = p.distance(&q);
    if len <= params.radius {
        return true;
    }
    let gap = Segment::new(p, q).expect("gap longer than the radius");
    let trim = params.radius.min(len * T::lit(0.25)) / len;
    let interior = gap.sub_segment(trim, T::one() - trim).unwrap_or(gap);
    density(&interior, tree, params.radius) >= params.gap_density_factor * params.density_threshold
}

fn ratio<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T) -> T {
    segment_stats(s, tree, radius).ratio_or_inf()
}

/// Attempts to merge two overlapping segments of one cluster.
///
/// When the region between their closest points is populated, the longer
/// segment is shifted toward the shorter one's midpoint by the shorter
/// segment's share of the combined length, and whichever of shifted and
/// original has the lower `e_rms / N` is kept.
pub fn merge_pair<T: Scalar>(
    longer: &Segment<T>,
    shorter: &Segment<T>,
    tree: &Octree<T>,
    params: &MergeParams<T>,
) -> MergeOutcome<T> {
    let (p, q) = closest_points(longer, shorter);
    if !gap_is_populated(p, q, tree, params) {
        return MergeOutcome::KeptBoth;
    }
    let (ll, ls) = (longer.length(), shorter.length());
    let delta = perpendicular_offset(&shorter.midpoint(), longer);
    let candidate = longer.translated(delta * (ls / (ls + ll)));
    if candidate == *longer {
        return MergeOutcome::Merged { segment: *longer, moved: false };
    }
    if ratio(&candidate, tree, params.radius) < ratio(longer, tree, params.radius) {
        MergeOutcome::Merged { segment: candidate, moved: true }
    } else {
        MergeOutcome::Merged { segment: *longer, moved: false }
    }
}

/// Attempts to join two non-overlapping segments of one cluster into the
/// segment spanning their farthest endpoints.
pub fn join_pair<T: Scalar>(
    si: &Segment<T>,
    sj: &Segment<T>,
    tree: &Octree<T>,
    params: &MergeParams<T>,
) -> JoinOutcome<T> {
    let pairs = [(si.a(), sj.a()), (si.a(), sj.b()), (si.b(), sj.a()), (si.b(), sj.b())];
    let dist = |k: usize| pairs[k].0.distance(&pairs[k].1);
    let nearest = (0..4).fold(0, |best, k| if dist(k) < dist(best) { k } else { best });
    let farthest = (0..4).fold(0, |best, k| if dist(k) > dist(best) { k } else { best });

    if !gap_is_populated(pairs[nearest].0, pairs[nearest].1, tree, params) {
        return JoinOutcome::KeptBoth;
    }
    let Ok(candidate) = Segment::new(pairs[farthest].0, pairs[farthest].1) else {
        return JoinOutcome::KeptBoth;
    };
    if candidate.length() < T::lit(MIN_SEGMENT_LENGTH) {
        return JoinOutcome::KeptBoth;
    }
    let rc = ratio(&candidate, tree, params.radius);
    let best = ratio(si, tree, params.radius).min(ratio(sj, tree, params.radius));
    if rc.is_finite() && rc <= best {
        JoinOutcome::Joined(candidate)
    } else {
        JoinOutcome::KeptBoth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;
    use crate::spatial_index::GaussianCloud;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment<f64> {
        Segment::new(Point3::new(a[0], a[1], a[2]), Point3::new(b[0], b[1], b[2])).unwrap()
    }

    fn build(pts: Vec<Point3<f64>>) -> Octree<f64> {
        let cloud = GaussianCloud::new(pts);
        let bb = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(3.0, 1.0, 1.0));
        Octree::with_defaults(&cloud, bb).unwrap()
    }

    /// Evenly spaced noisy samples of the x-axis segment `[from, to]` at height `y`.
    fn edge(from: f64, to: f64, y: f64, per_meter: f64, sigma: f64, seed: u64) -> Vec<Point3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let n = ((to - from) * per_meter).round() as usize;
        (0..n)
            .map(|i| {
                let x = from + (i as f64 + 0.5) / per_meter;
                let mut j = || if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                Point3::new(x + j(), y + j(), j())
            })
            .collect()
    }

    fn params(threshold: f64) -> MergeParams<f64> {
        MergeParams { radius: 0.05, density_threshold: threshold, gap_density_factor: 1.0 }
    }

    #[test]
    fn coaxial_shorter_keeps_longer() {
        let t = build(edge(0.0, 2.0, 0.0, 300.0, 0.0, 1));
        let longer = seg([0.0, 0.0, 0.0], [2.0, 0.0, 0.0]);
        let shorter = seg([0.5, 0.0, 0.0], [1.5, 0.0, 0.0]);
        assert_eq!(
            merge_pair(&longer, &shorter, &t, &params(5.0)),
            MergeOutcome::Merged { segment: longer, moved: false }
        );
    }

    #[test]
    fn dense_band_between_duplicates_improves_ratio() {
        let t = build(edge(0.0, 1.0, 0.02, 600.0, 0.003, 2));
        let longer = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let shorter = seg([0.1, 0.04, 0.0], [0.9, 0.04, 0.0]);
        let out = merge_pair(&longer, &shorter, &t, &params(5.0));
        let MergeOutcome::Merged { segment, moved } = out else { panic!("expected merge") };
        assert!(moved);
        let r = |s: &Segment<f64>| segment_stats(s, &t, 0.05).ratio_or_inf();
        assert!(r(&segment) < r(&longer));
        assert!(r(&segment) < r(&shorter));
    }

    #[test]
    fn empty_gap_keeps_both() {
        // Two populated parallel edges 0.3 m apart with nothing between them.
        let mut pts = edge(0.0, 1.0, 0.0, 400.0, 0.002, 3);
        pts.extend(edge(0.0, 1.0, 0.3, 400.0, 0.002, 4));
        let t = build(pts);
        let longer = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let shorter = seg([0.1, 0.3, 0.0], [0.9, 0.3, 0.0]);
        assert_eq!(merge_pair(&longer, &shorter, &t, &params(5.0)), MergeOutcome::KeptBoth);
    }

    #[test]
    fn collinear_halves_with_dense_gap_join() {
        let t = build(edge(0.0, 1.0, 0.0, 500.0, 0.004, 5));
        let si = seg([0.0, 0.0, 0.0], [0.47, 0.0, 0.0]);
        let sj = seg([0.52, 0.0, 0.0], [1.0, 0.0, 0.0]);
        match join_pair(&si, &sj, &t, &params(5.0)) {
            JoinOutcome::Joined(s) => {
                assert!(s.a().distance(&si.a()) < 1e-12 || s.b().distance(&si.a()) < 1e-12);
                assert!((s.length() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected join, got {other:?}"),
        }
    }

    #[test]
    fn collinear_halves_with_empty_gap_stay_apart() {
        let mut pts = edge(0.0, 0.45, 0.0, 500.0, 0.002, 6);
        pts.extend(edge(0.6, 1.0, 0.0, 500.0, 0.002, 7));
        let t = build(pts);
        let si = seg([0.0, 0.0, 0.0], [0.45, 0.0, 0.0]);
        let sj = seg([0.6, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(join_pair(&si, &sj, &t, &params(5.0)), JoinOutcome::KeptBoth);
    }

    #[test]
    fn l_corner_join_rejected() {
        // Dense corner, so the gap test passes, but the diagonal candidate
        // crosses empty space and covers almost nothing.
        let mut pts = edge(0.0, 1.0, 0.0, 500.0, 0.003, 8);
        pts.extend(
            edge(0.0, 1.0, 0.0, 500.0, 0.003, 9)
                .into_iter()
                .map(|p| Point3::new(1.0 - p.y, p.x, p.z)),
        );
        let t = build(pts);
        let si = seg([0.0, 0.0, 0.0], [0.98, 0.0, 0.0]);
        let sj = seg([1.0, 0.02, 0.0], [1.0, 1.0, 0.0]);
        assert_eq!(join_pair(&si, &sj, &t, &params(5.0)), JoinOutcome::KeptBoth);
    }
}
