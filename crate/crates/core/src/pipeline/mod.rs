//! Segment refinement against a Gaussian center cloud.
//!
//! Stages run in a fixed order: translate, crop, outlier removal, clustering,
//! then merge/join inside each cluster. The per-segment stages run on the
//! ambient rayon pool; clustering and consolidation are sequential.

mod cluster;
mod crop;
mod merge;
mod outlier;
mod stats;
mod translate;

pub use cluster::{cluster, similarity, Admission, ClusterUniverse, SimilarityBranch};
pub use crop::{crop_segment, CropOutcome, CropParams};
pub use merge::{join_pair, merge_pair, JoinOutcome, MergeOutcome, MergeParams};
pub use outlier::{outlier_threshold, remove_outliers};
pub use stats::{density, segment_stats, SegmentStats};
pub use translate::{mean_offset, translate_segment};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{overlap, Aabb, OverlapSemantics, Segment};
use crate::scalar::Scalar;
use crate::spatial_index::{GaussianCloud, Octree, DEFAULT_LEAF_CAPACITY, DEFAULT_MAX_DEPTH};

/// Every tunable of the refinement pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    /// Cylinder radius used by every stage, meters.
    pub working_radius: T,
    /// Scales the mean segment density into the outlier threshold.
    pub outlier_scaler: T,
    /// Distance weight of the similarity score, 1/m². `None` means `2 / r²`.
    pub similarity_weight: Option<T>,
    /// Initial admission threshold and size-scaled increment of clustering.
    pub cluster_c: T,
    pub crop_max_iters: usize,
    pub crop_min_interval: T,
    pub crop_window_fraction: T,
    pub crop_density_ratio: T,
    pub merge_gap_density_factor: T,
    pub merge_max_sweeps: usize,
    pub overlap_semantics: OverlapSemantics,
    pub similarity_branch: SimilarityBranch,
    pub octree_depth: usize,
    pub leaf_capacity: usize,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            working_radius: T::lit(0.05),
            outlier_scaler: T::lit(0.02),
            similarity_weight: None,
            cluster_c: T::lit(0.25),
            crop_max_iters: 10,
            crop_min_interval: T::lit(1e-4),
            crop_window_fraction: T::lit(0.25),
            crop_density_ratio: T::lit(0.5),
            merge_gap_density_factor: T::lit(1.0),
            merge_max_sweeps: 10,
            overlap_semantics: OverlapSemantics::Conjunction,
            similarity_branch: SimilarityBranch::Aligned,
            octree_depth: DEFAULT_MAX_DEPTH,
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig { key: key.to_string(), reason: reason.into() }
}

impl<T: Scalar> PipelineConfig<T> {
    /// Resolved similarity weight.
    pub fn similarity_weight(&self) -> T {
        self.similarity_weight
            .unwrap_or_else(|| T::lit(2.0) / (self.working_radius * self.working_radius))
    }

    pub fn crop_params(&self) -> CropParams<T> {
        CropParams {
            radius: self.working_radius,
            window_fraction: self.crop_window_fraction,
            density_ratio: self.crop_density_ratio,
            max_iters: self.crop_max_iters,
            min_interval: self.crop_min_interval,
        }
    }

    pub fn merge_params(&self, density_threshold: T) -> MergeParams<T> {
        MergeParams {
            radius: self.working_radius,
            density_threshold,
            gap_density_factor: self.merge_gap_density_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let finite_pos = |v: T| v.is_finite() && v > zero;
        if !finite_pos(self.working_radius) {
            return Err(invalid("working_radius", "must be > 0"));
        }
        if !(self.outlier_scaler > zero && self.outlier_scaler <= one) {
            return Err(invalid("outlier_scaler", "must lie in (0, 1]"));
        }
        if let Some(w) = self.similarity_weight {
            if !(w.is_finite() && w >= zero) {
                return Err(invalid("similarity_weight", "must be finite and >= 0"));
            }
        }
        if !finite_pos(self.cluster_c) {
            return Err(invalid("cluster_c", "must be > 0"));
        }
        if self.crop_max_iters < 1 {
            return Err(invalid("crop_max_iters", "must be >= 1"));
        }
        if !(self.crop_min_interval.is_finite() && self.crop_min_interval >= zero) {
            return Err(invalid("crop_min_interval", "must be >= 0"));
        }
        if !(self.crop_window_fraction > zero && self.crop_window_fraction <= T::lit(0.5)) {
            return Err(invalid("crop_window_fraction", "must lie in (0, 0.5]"));
        }
        if !(self.crop_density_ratio > zero && self.crop_density_ratio < one) {
            return Err(invalid("crop_density_ratio", "must lie in (0, 1)"));
        }
        if !(self.merge_gap_density_factor.is_finite() && self.merge_gap_density_factor >= zero) {
            return Err(invalid("merge_gap_density_factor", "must be >= 0"));
        }
        if self.merge_max_sweeps < 1 {
            return Err(invalid("merge_max_sweeps", "must be >= 1"));
        }
        if self.octree_depth < 1 {
            return Err(invalid("octree_depth", "must be >= 1"));
        }
        if self.leaf_capacity < 1 {
            return Err(invalid("leaf_capacity", "must be >= 1"));
        }
        Ok(())
    }
}

/// Segment count entering and leaving one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageCount {
    pub stage: &'static str,
    pub input: usize,
    pub output: usize,
}

/// Scene-wide summary of a segment set at the working radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate<T> {
    pub segment_count: usize,
    pub total_length: T,
    /// Covered counts summed over segments (with multiplicity).
    pub covered_sum: usize,
    pub mean_density: T,
    pub mean_e_rms: T,
}

impl<T: Scalar> Aggregate<T> {
    fn of(segments: &[Segment<T>], stats: &[SegmentStats<T>]) -> Self {
        let n = segments.len();
        let nf = T::from_usize_lossy(n.max(1));
        Self {
            segment_count: n,
            total_length: segments.iter().map(|s| s.length()).sum(),
            covered_sum: stats.iter().map(|s| s.covered_count).sum(),
            mean_density: stats.iter().map(|s| s.density).sum::<T>() / nf,
            mean_e_rms: stats.iter().map(|s| s.e_rms).sum::<T>() / nf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineReport<T> {
    pub stages: Vec<StageCount>,
    pub indexed_points: usize,
    pub dropped_points: usize,
    /// Segments whose translation vector was non-zero.
    pub translated: usize,
    pub cropped: usize,
    /// Crops that collapsed and were routed to the outlier stage.
    pub crop_flagged: usize,
    pub density_threshold: T,
    /// Segments dropped by the outlier stage, flagged crops included.
    pub removed_outliers: usize,
    pub clusters: usize,
    pub multi_member_clusters: usize,
    /// Shorter segments consumed by merges.
    pub merges: usize,
    /// Merges where the shifted candidate replaced the longer segment.
    pub merges_moved: usize,
    pub joins: usize,
    /// Largest number of sweeps any cluster needed.
    pub sweeps: usize,
    pub before: Aggregate<T>,
    pub after: Aggregate<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<T> {
    pub segments: Vec<Segment<T>>,
    pub report: RefineReport<T>,
}

/// Runs all stages and returns the surviving segments with a stage report.
///
/// The octree covers the segment endpoint bounds padded by twice the working
/// radius, so translated segments still see their whole neighborhood.
pub fn refine<T: Scalar>(
    segments: &[Segment<T>],
    cloud: &GaussianCloud<T>,
    cfg: &PipelineConfig<T>,
) -> Result<Refinement<T>> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyInput("refinement needs a non-empty cloud"));
    }
    let bbox = Aabb::from_segments(segments)
        .ok_or(Error::EmptyInput("refinement needs at least one segment"))?
        .padded(cfg.working_radius * T::lit(2.0));
    let tree = Octree::build(cloud, cfg.octree_depth, cfg.leaf_capacity, bbox)?;
    let r = cfg.working_radius;
    let stats_of = |segs: &[Segment<T>]| -> Vec<SegmentStats<T>> {
        segs.par_iter().map(|s| segment_stats(s, &tree, r)).collect()
    };
    let before = Aggregate::of(segments, &stats_of(segments));
    let mut stages = Vec::new();

    let translated: Vec<Segment<T>> = segments.par_iter().map(|s| translate_segment(s, &tree, r)).collect();
    let moved = translated.iter().zip(segments).filter(|(t, s)| t != s).count();
    stages.push(StageCount { stage: "translate", input: segments.len(), output: translated.len() });

    let crop_params = cfg.crop_params();
    let crops: Vec<CropOutcome<T>> = translated.par_iter().map(|s| crop_segment(s, &tree, &crop_params)).collect();
    let cropped = crops.iter().filter(|c| c.changed() && !c.flagged).count();
    let crop_flagged = crops.iter().filter(|c| c.flagged).count();
    let cropped_segs: Vec<Segment<T>> = crops.iter().map(|c| c.segment).collect();
    stages.push(StageCount { stage: "crop", input: translated.len(), output: cropped_segs.len() });

    let crop_stats = stats_of(&cropped_segs);
    let theta = outlier_threshold(&crop_stats, cfg.outlier_scaler)?;
    // Flagged crops and segments covering no point at all are dropped along
    // with the density outliers.
    let survivors: Vec<Segment<T>> = cropped_segs
        .iter()
        .zip(&crop_stats)
        .zip(&crops)
        .filter(|((_, st), c)| !c.flagged && st.covered_count > 0 && st.density >= theta)
        .map(|((s, _), _)| *s)
        .collect();
    let removed_outliers = cropped_segs.len() - survivors.len();
    stages.push(StageCount { stage: "outliers", input: cropped_segs.len(), output: survivors.len() });

    let universe = cluster(&survivors, cfg.similarity_weight(), cfg.cluster_c, cfg.similarity_branch);
    let groups = universe.groups();
    stages.push(StageCount { stage: "cluster", input: survivors.len(), output: survivors.len() });

    let merge_params = cfg.merge_params(theta);
    let mut slots: Vec<Option<Segment<T>>> = survivors.iter().copied().map(Some).collect();
    let mut tally = Tally::default();
    for group in groups.iter().filter(|g| g.len() > 1) {
        consolidate(group, &mut slots, &tree, cfg, &merge_params, &mut tally);
    }
    let out: Vec<Segment<T>> = slots.into_iter().flatten().collect();
    stages.push(StageCount { stage: "merge_join", input: survivors.len(), output: out.len() });

    let after = Aggregate::of(&out, &stats_of(&out));
    Ok(Refinement {
        segments: out,
        report: RefineReport {
            stages,
            indexed_points: tree.indexed_len(),
            dropped_points: tree.dropped(),
            translated: moved,
            cropped,
            crop_flagged,
            density_threshold: theta,
            removed_outliers,
            clusters: groups.len(),
            multi_member_clusters: groups.iter().filter(|g| g.len() > 1).count(),
            merges: tally.merges,
            merges_moved: tally.merges_moved,
            joins: tally.joins,
            sweeps: tally.sweeps,
            before,
            after,
        },
    })
}

#[derive(Default)]
struct Tally {
    merges: usize,
    merges_moved: usize,
    joins: usize,
    sweeps: usize,
}

/// Repeated longest-first pair sweeps over one cluster until nothing changes
/// or the sweep cap is hit. Merges keep the longer segment's slot; joins keep
/// the lower slot.
fn consolidate<T: Scalar>(
    group: &[usize],
    slots: &mut [Option<Segment<T>>],
    tree: &Octree<T>,
    cfg: &PipelineConfig<T>,
    params: &MergeParams<T>,
    tally: &mut Tally,
) {
    for sweep in 1..=cfg.merge_max_sweeps {
        let mut order: Vec<usize> = group.iter().copied().filter(|&i| slots[i].is_some()).collect();
        order.sort_by(|&x, &y| {
            let (lx, ly) = (slots[x].unwrap().length(), slots[y].unwrap().length());
            ly.partial_cmp(&lx).expect("finite lengths").then(x.cmp(&y))
        });
        let mut changed = false;
        for ii in 0..order.len() {
            for jj in (ii + 1)..order.len() {
                let (i, j) = (order[ii], order[jj]);
                let (Some(si), Some(sj)) = (slots[i], slots[j]) else { continue };
                let (li, sh) = if si.length() >= sj.length() { (i, j) } else { (j, i) };
                let (longer, shorter) = (slots[li].unwrap(), slots[sh].unwrap());
                if overlap(&longer, &shorter, cfg.overlap_semantics) {
                    if let MergeOutcome::Merged { segment, moved } = merge_pair(&longer, &shorter, tree, params) {
                        slots[li] = Some(segment);
                        slots[sh] = None;
                        tally.merges += 1;
                        tally.merges_moved += usize::from(moved);
                        changed = true;
                    }
                } else if let JoinOutcome::Joined(segment) = join_pair(&si, &sj, tree, params) {
                    slots[i.min(j)] = Some(segment);
                    slots[i.max(j)] = None;
                    tally.joins += 1;
                    changed = true;
                }
            }
        }
        tally.sweeps = tally.sweeps.max(sweep);
        if !changed {
            break;
        }
    }
}
