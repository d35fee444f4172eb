//! Density-driven trimming of overextended segment ends.
//!
//! Each end is tested on its own. When the window touching an end is much
//! sparser than the central window, a bisection between the midpoint and
//! that end locates where the density drops, and the end is moved there.

use crate::geom::Segment;
use crate::scalar::Scalar;
use crate::spatial_index::Octree;

use super::stats::density;

/// Parameters of the cropping search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropParams<T> {
    pub radius: T,
    /// Window length as a fraction of the segment length.
    pub window_fraction: T,
    /// An end is sparse when its density is below `density_ratio` times the
    /// central density.
    pub density_ratio: T,
    pub max_iters: usize,
    /// Bisection stops once the bracket is shorter than this, meters.
    pub min_interval: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropOutcome<T> {
    pub segment: Segment<T>,
    pub cropped_a: bool,
    pub cropped_b: bool,
    /// Both ends collapsed onto each other; the input is returned unchanged
    /// and the segment is handed to the outlier stage for removal.
    pub flagged: bool,
}

impl<T> CropOutcome<T> {
    pub fn changed(&self) -> bool {
        self.cropped_a || self.cropped_b
    }
}

/// Density of the window of `width` (axial parameter units) centered at `t`.
fn window_density<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T, t: T, width: T) -> T {
    let half = width * T::lit(0.5);
    let w = s.sub_segment(t - half, t + half).expect("window has positive length");
    density(&w, tree, radius)
}

/// Bisects between the dense parameter `dense` and the sparse end `sparse`,
/// returning the parameter of the density boundary.
fn search_boundary<T: Scalar>(
    s: &Segment<T>,
    tree: &Octree<T>,
    p: &CropParams<T>,
    threshold: T,
    mut dense: T,
    mut sparse: T,
) -> T {
    let len = s.length();
    let half = T::lit(0.5);
    let mut iters = 0usize;
    loop {
        iters += 1;
        let mid = (dense + sparse) * half;
        if iters > p.max_iters || (sparse - dense).abs() * len < p.min_interval {
            return mid;
        }
        if window_density(s, tree, p.radius, mid, p.window_fraction) >= threshold {
            dense = mid;
        } else {
            sparse = mid;
        }
    }
}

pub fn crop_segment<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, p: &CropParams<T>) -> CropOutcome<T> {
    let unchanged = CropOutcome { segment: *s, cropped_a: false, cropped_b: false, flagged: false };
    let f = p.window_fraction;
    let half = T::lit(0.5);
    let interior = window_density(s, tree, p.radius, half, f);
    if interior <= T::zero() {
        return unchanged;
    }
    let threshold = p.density_ratio * interior;
    let tip_a = window_density(s, tree, p.radius, f * half, f);
    let tip_b = window_density(s, tree, p.radius, T::one() - f * half, f);

    let mut ta = T::zero();
    let mut tb = T::one();
    let cropped_a = tip_a < threshold;
    let cropped_b = tip_b < threshold;
    if cropped_a {
        ta = search_boundary(s, tree, p, threshold, half, T::zero());
    }
    if cropped_b {
        tb = search_boundary(s, tree, p, threshold, half, T::one());
    }
    if !cropped_a && !cropped_b {
        return unchanged;
    }
    match s.sub_segment(ta, tb) {
        Ok(seg) if tb > ta => CropOutcome { segment: seg, cropped_a, cropped_b, flagged: false },
        _ => CropOutcome { flagged: true, ..unchanged },
    }
}
