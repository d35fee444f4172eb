use crate::geom::{point_segment_distance, Cylinder, Segment};
use crate::scalar::Scalar;
use crate::spatial_index::Octree;

/// Coverage statistics of one segment at a given cylinder radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats<T> {
    /// Number of covered points.
    pub covered_count: usize,
    /// Covered points per meter of segment.
    pub density: T,
    /// Root mean square point-to-segment distance of covered points, meters.
    pub e_rms: T,
}

impl<T: Scalar> SegmentStats<T> {
    /// `e_rms / covered_count`; `None` when nothing is covered.
    pub fn ratio(&self) -> Option<T> {
        (self.covered_count > 0).then(|| self.e_rms / T::from_usize_lossy(self.covered_count))
    }

    /// Ratio with "nothing covered" ranked worst.
    pub fn ratio_or_inf(&self) -> T {
        self.ratio().unwrap_or_else(T::infinity)
    }
}

pub fn segment_stats<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T) -> SegmentStats<T> {
    let c = Cylinder::new(*s, radius).expect("working radius validated positive");
    let mut n = 0usize;
    let mut sum_sq = T::zero();
    tree.visit_cylinder(&c, |_, p| {
        let d = point_segment_distance(p, s);
        sum_sq = sum_sq + d * d;
        n += 1;
    });
    let e_rms = if n == 0 { T::zero() } else { (sum_sq / T::from_usize_lossy(n)).sqrt() };
    SegmentStats { covered_count: n, density: T::from_usize_lossy(n) / s.length(), e_rms }
}

/// Points per meter inside the cylinder around `s`.
pub fn density<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T) -> T {
    let c = Cylinder::new(*s, radius).expect("working radius validated positive");
    T::from_usize_lossy(tree.count_cylinder(&c)) / s.length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Aabb, Point3};
    use crate::spatial_index::GaussianCloud;

    fn tree(points: Vec<Point3<f64>>) -> (GaussianCloud<f64>, Octree<f64>) {
        let cloud = GaussianCloud::new(points);
        let bb = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(2.0, 1.0, 1.0));
        let t = Octree::with_defaults(&cloud, bb).unwrap();
        (cloud, t)
    }

    #[test]
    fn on_axis_points_have_zero_error() {
        let pts = (0..50).map(|i| Point3::new(i as f64 / 49.0, 0.0, 0.0)).collect();
        let (_, t) = tree(pts);
        let s = Segment::new(Point3::zero(), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let st = segment_stats(&s, &t, 0.05);
        assert_eq!(st.covered_count, 50);
        assert_eq!(st.e_rms, 0.0);
        assert_eq!(st.density, 50.0);
        assert_eq!(st.ratio(), Some(0.0));
    }

    #[test]
    fn constant_offset_distances() {
        let pts = (0..100)
            .map(|i| {
                let a = i as f64 * 0.37;
                Point3::new(0.005 + i as f64 * 0.0099, 0.01 * a.cos(), 0.01 * a.sin())
            })
            .collect();
        let (_, t) = tree(pts);
        let s = Segment::new(Point3::zero(), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let st = segment_stats(&s, &t, 0.05);
        assert_eq!(st.covered_count, 100);
        assert!((st.e_rms - 0.01).abs() < 1e-12);
    }

    #[test]
    fn empty_cylinder() {
        let (_, t) = tree(vec![Point3::new(0.5, 0.5, 0.5)]);
        let s = Segment::new(Point3::zero(), Point3::new(1.0, 0.0, 0.0)).unwrap();
        let st = segment_stats(&s, &t, 0.05);
        assert_eq!(st.covered_count, 0);
        assert_eq!(st.e_rms, 0.0);
        assert_eq!(st.ratio(), None);
        assert!(st.ratio_or_inf().is_infinite());
    }
}
