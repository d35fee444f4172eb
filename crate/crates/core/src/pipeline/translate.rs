use crate::geom::{perpendicular_offset, Cylinder, Point3, Segment};
use crate::scalar::Scalar;
use crate::spatial_index::Octree;

/// Least-squares rigid translation of `s` onto the points its cylinder covers.
///
/// The minimizer of the summed squared difference between the translation and
/// each point's perpendicular offset is the mean offset. Direction and length
/// are unchanged; an empty cylinder leaves the segment where it is.
pub fn translate_segment<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T) -> Segment<T> {
    match mean_offset(s, tree, radius) {
        Some(t) => s.translated(t),
        None => *s,
    }
}

/// Mean perpendicular offset of the covered points, `None` when none are covered.
pub fn mean_offset<T: Scalar>(s: &Segment<T>, tree: &Octree<T>, radius: T) -> Option<Point3<T>> {
    let c = Cylinder::new(*s, radius).expect("working radius validated positive");
    let mut sum = Point3::zero();
    let mut n = 0usize;
    tree.visit_cylinder(&c, |_, p| {
        sum += perpendicular_offset(p, s);
        n += 1;
    });
    (n > 0).then(|| sum / T::from_usize_lossy(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;
    use crate::spatial_index::GaussianCloud;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build(points: Vec<Point3<f64>>) -> Octree<f64> {
        let cloud = GaussianCloud::new(points);
        let bb = Aabb::new(Point3::new(-1.0, -1.0, -1.0), Point3::new(2.0, 1.0, 1.0));
        Octree::with_defaults(&cloud, bb).unwrap()
    }

    fn unit_x() -> Segment<f64> {
        Segment::new(Point3::zero(), Point3::new(1.0, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn symmetric_points_leave_segment_in_place() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let x = 0.025 + i as f64 * 0.05;
            pts.push(Point3::new(x, 0.01, 0.0));
            pts.push(Point3::new(x, -0.01, 0.0));
            pts.push(Point3::new(x, 0.0, 0.02));
            pts.push(Point3::new(x, 0.0, -0.02));
        }
        let t = build(pts);
        let out = translate_segment(&unit_x(), &t, 0.05);
        assert!(out.a().distance(&Point3::zero()) < 1e-15);
        assert!(out.b().distance(&Point3::new(1.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn constant_displacement_is_recovered() {
        let v = Point3::new(0.0, 0.012, -0.009);
        let pts = (0..40).map(|i| Point3::new(0.01 + i as f64 * 0.0245, 0.0, 0.0) + v).collect();
        let t = build(pts);
        let out = translate_segment(&unit_x(), &t, 0.05);
        assert!(out.a().distance(&v) < 1e-9);
        assert!(out.b().distance(&(Point3::new(1.0, 0.0, 0.0) + v)) < 1e-9);
    }

    #[test]
    fn empty_cylinder_is_identity() {
        let t = build(vec![Point3::new(0.5, 0.5, 0.5)]);
        assert_eq!(translate_segment(&unit_x(), &t, 0.05), unit_x());
    }

    #[test]
    fn residual_mean_offset_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = Segment::new(Point3::new(0.1, -0.2, 0.05), Point3::new(0.9, 0.3, -0.1)).unwrap();
        let pts: Vec<Point3<f64>> = (0..500)
            .map(|_| {
                let base = s.point_at(rng.gen());
                base + Point3::new(rng.gen_range(-0.03..0.04), rng.gen_range(-0.03..0.03), rng.gen_range(-0.02..0.03))
            })
            .collect();
        let t = build(pts.clone());
        let c = Cylinder::new(s, 0.05).unwrap();
        let covered = t.query_cylinder(&c);
        let out = translate_segment(&s, &t, 0.05);
        let mut sum = Point3::zero();
        for &i in &covered {
            sum += perpendicular_offset(&pts[i], &out);
        }
        let mean = sum / covered.len() as f64;
        assert!(mean.norm() < 1e-9, "{mean:?}");
        assert!((out.length() - s.length()).abs() < 1e-12);
        assert!((out.unit_direction() - s.unit_direction()).norm() < 1e-12);
    }
}
