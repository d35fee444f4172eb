use crate::error::{Error, Result};
use crate::geom::Segment;
use crate::scalar::Scalar;

use super::stats::SegmentStats;

/// Global density threshold: `scaler` times the mean segment density.
pub fn outlier_threshold<T: Scalar>(stats: &[SegmentStats<T>], scaler: T) -> Result<T> {
    if stats.is_empty() {
        return Err(Error::EmptyInput("density threshold needs at least one segment"));
    }
    let sum: T = stats.iter().map(|s| s.density).sum();
    Ok(scaler * sum / T::from_usize_lossy(stats.len()))
}

/// Keeps segments whose density reaches `threshold`, preserving order.
pub fn remove_outliers<T: Scalar>(
    segments: &[Segment<T>],
    stats: &[SegmentStats<T>],
    threshold: T,
) -> Vec<Segment<T>> {
    assert_eq!(segments.len(), stats.len(), "stats must align with segments");
    segments
        .iter()
        .zip(stats)
        .filter(|(_, st)| st.density >= threshold)
        .map(|(s, _)| *s)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;

    fn st(density: f64) -> SegmentStats<f64> {
        SegmentStats { covered_count: 0, density, e_rms: 0.0 }
    }

    #[test]
    fn threshold_arithmetic() {
        let t = outlier_threshold(&[st(100.0), st(300.0)], 0.02).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        let t = outlier_threshold(&[st(7.0); 5], 0.02).unwrap();
        assert!((t - 0.14).abs() < 1e-12);
        assert!(outlier_threshold::<f64>(&[], 0.02).is_err());
    }

    #[test]
    fn removal_keeps_order() {
        let segs: Vec<Segment<f64>> = (0..4)
            .map(|i| Segment::new(Point3::new(i as f64, 0.0, 0.0), Point3::new(i as f64, 1.0, 0.0)).unwrap())
            .collect();
        let stats = [st(10.0), st(1.0), st(5.0), st(4.0)];
        let kept = remove_outliers(&segs, &stats, 4.0);
        assert_eq!(kept, vec![segs[0], segs[2], segs[3]]);
        assert_eq!(remove_outliers(&segs, &stats, 0.0), segs);
    }
}
