//! Points, segments, capped cylinders and the distance/containment
//! predicates the rest of the crate is built on.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Segments shorter than this (meters) are rejected at construction.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-9;

/// A point (or displacement vector) in scene coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn component_min(&self, o: &Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn component_max(&self, o: &Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    /// Linear interpolation `self + t (o - self)`.
    #[inline]
    pub fn lerp(&self, o: &Self, t: T) -> Self {
        *self + (*o - *self) * t
    }

    pub fn cast<U: Scalar>(&self) -> Point3<U> {
        Point3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T: Scalar> Add for Point3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Point3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Point3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Point3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Point3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Scalar> Neg for Point3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Directed segment from `a` to `b` with strictly positive length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    a: Point3<T>,
    b: Point3<T>,
}

impl<T: Scalar> Segment<T> {
    pub fn new(a: Point3<T>, b: Point3<T>) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Geometry("segment endpoint is not finite".into()));
        }
        let len = a.distance(&b);
        if !len.is_finite() || len < T::lit(MIN_SEGMENT_LENGTH) {
            return Err(Error::Geometry(format!(
                "degenerate segment (length {len} below {MIN_SEGMENT_LENGTH})"
            )));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn a(&self) -> Point3<T> {
        self.a
    }

    #[inline]
    pub fn b(&self) -> Point3<T> {
        self.b
    }

    /// `b - a`.
    #[inline]
    pub fn direction(&self) -> Point3<T> {
        self.b - self.a
    }

    #[inline]
    pub fn unit_direction(&self) -> Point3<T> {
        self.direction() / self.length()
    }

    #[inline]
    pub fn length(&self) -> T {
        self.direction().norm()
    }

    #[inline]
    pub fn midpoint(&self) -> Point3<T> {
        self.point_at(T::lit(0.5))
    }

    /// Point at axial parameter `t` (0 at `a`, 1 at `b`), unclamped.
    #[inline]
    pub fn point_at(&self, t: T) -> Point3<T> {
        self.a.lerp(&self.b, t)
    }

    /// Unclamped axial parameter of the orthogonal projection of `p`.
    #[inline]
    pub fn project_param(&self, p: &Point3<T>) -> T {
        let d = self.direction();
        (*p - self.a).dot(&d) / d.norm_squared()
    }

    pub fn reversed(&self) -> Self {
        Self { a: self.b, b: self.a }
    }

    /// Rigid translation by `v`.
    pub fn translated(&self, v: Point3<T>) -> Self {
        Self { a: self.a + v, b: self.b + v }
    }

    /// Sub-segment between axial parameters `t0` and `t1`.
    pub fn sub_segment(&self, t0: T, t1: T) -> Result<Self> {
        Self::new(self.point_at(t0), self.point_at(t1))
    }

    pub fn cast<U: Scalar>(&self) -> Segment<U> {
        Segment { a: self.a.cast(), b: self.b.cast() }
    }
}

/// Capped cylinder of `radius` around `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder<T> {
    axis: Segment<T>,
    radius: T,
}

impl<T: Scalar> Cylinder<T> {
    pub fn new(axis: Segment<T>, radius: T) -> Result<Self> {
        if !radius.is_finite() || radius <= T::zero() {
            return Err(Error::Geometry(format!("cylinder radius must be finite and > 0, got {radius}")));
        }
        Ok(Self { axis, radius })
    }

    #[inline]
    pub fn axis(&self) -> &Segment<T> {
        &self.axis
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    #[inline]
    pub fn contains(&self, p: &Point3<T>) -> bool {
        cylinder_contains(self, p)
    }

    /// Axis-aligned bounds of the solid.
    pub fn bounding_box(&self) -> Aabb<T> {
        let r = Point3::new(self.radius, self.radius, self.radius);
        let lo = self.axis.a.component_min(&self.axis.b) - r;
        let hi = self.axis.a.component_max(&self.axis.b) + r;
        Aabb { min: lo, max: hi }
    }
}

/// Axis-aligned box with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Point3<T>,
    pub max: Point3<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn new(min: Point3<T>, max: Point3<T>) -> Self {
        Self { min, max }
    }

    /// Tight bounds of a point set, `None` when empty.
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Point3<T>>,
    {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = Self { min: first, max: first };
        for p in it {
            bb.min = bb.min.component_min(p);
            bb.max = bb.max.component_max(p);
        }
        Some(bb)
    }

    /// Bounds of all segment endpoints, `None` when there are no segments.
    pub fn from_segments(segments: &[Segment<T>]) -> Option<Self> {
        let pts: Vec<Point3<T>> = segments.iter().flat_map(|s| [s.a, s.b]).collect();
        Self::from_points(&pts)
    }

    pub fn padded(&self, margin: T) -> Self {
        let m = Point3::new(margin, margin, margin);
        Self { min: self.min - m, max: self.max + m }
    }

    /// True when every extent is finite and strictly positive.
    pub fn is_valid(&self) -> bool {
        let e = self.extent();
        self.min.is_finite()
            && self.max.is_finite()
            && e.x > T::zero()
            && e.y > T::zero()
            && e.z > T::zero()
    }

    #[inline]
    pub fn extent(&self) -> Point3<T> {
        self.max - self.min
    }

    #[inline]
    pub fn center(&self) -> Point3<T> {
        self.min.lerp(&self.max, T::lit(0.5))
    }

    #[inline]
    pub fn half_diagonal(&self) -> T {
        self.extent().norm() * T::lit(0.5)
    }

    #[inline]
    pub fn contains(&self, p: &Point3<T>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    #[inline]
    pub fn intersects(&self, o: &Self) -> bool {
        self.min.x <= o.max.x
            && self.max.x >= o.min.x
            && self.min.y <= o.max.y
            && self.max.y >= o.min.y
            && self.min.z <= o.max.z
            && self.max.z >= o.min.z
    }
}

/// Distance from `p` to the closest point of the closed segment `s`.
pub fn point_segment_distance<T: Scalar>(p: &Point3<T>, s: &Segment<T>) -> T {
    let t = s.project_param(p).max(T::zero()).min(T::one());
    p.distance(&s.point_at(t))
}

/// Distance from `p` to the infinite line through `s`.
pub fn point_line_distance<T: Scalar>(p: &Point3<T>, s: &Segment<T>) -> T {
    perpendicular_offset(p, s).norm()
}

/// Capped, boundary-inclusive cylinder membership.
#[inline]
pub fn cylinder_contains<T: Scalar>(c: &Cylinder<T>, p: &Point3<T>) -> bool {
    let axis = &c.axis;
    let d = axis.direction();
    let len2 = d.norm_squared();
    let rel = *p - axis.a;
    let along = rel.dot(&d);
    if along < T::zero() || along > len2 {
        return false;
    }
    let radial = rel - d * (along / len2);
    radial.norm_squared() <= c.radius * c.radius
}

/// Displacement from the axis line of `s` to `p`, axial component removed.
#[inline]
pub fn perpendicular_offset<T: Scalar>(p: &Point3<T>, s: &Segment<T>) -> Point3<T> {
    let u = s.unit_direction();
    let rel = *p - s.a;
    rel - u * rel.dot(&u)
}

/// How the axial overlap predicate combines its two half-space tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapSemantics {
    /// An endpoint overlaps when it lies strictly between both end planes.
    #[default]
    Conjunction,
    /// Either half-space test suffices, as literally printed in the source formula.
    PaperUnion,
}

impl OverlapSemantics {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Conjunction => "conjunction",
            Self::PaperUnion => "paper-union",
        }
    }
}

impl std::str::FromStr for OverlapSemantics {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conjunction" => Ok(Self::Conjunction),
            "paper-union" => Ok(Self::PaperUnion),
            other => Err(format!("unknown overlap semantics `{other}` (expected conjunction|paper-union)")),
        }
    }
}

/// Whether any endpoint of `shorter` projects axially inside `longer`.
pub fn overlap<T: Scalar>(longer: &Segment<T>, shorter: &Segment<T>, semantics: OverlapSemantics) -> bool {
    let d = longer.direction();
    [shorter.a, shorter.b].iter().any(|p| {
        let past_start = (*p - longer.a).dot(&d) > T::zero();
        let before_end = (*p - longer.b).dot(&d) < T::zero();
        match semantics {
            OverlapSemantics::Conjunction => past_start && before_end,
            OverlapSemantics::PaperUnion => past_start || before_end,
        }
    })
}

/// Closest points between two closed segments, `(on_s1, on_s2)`.
pub fn closest_points<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> (Point3<T>, Point3<T>) {
    let d1 = s1.direction();
    let d2 = s2.direction();
    let r = s1.a - s2.a;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let zero = T::zero();
    let one = T::one();
    let clamp = |v: T| v.max(zero).min(one);

    let mut s = if denom > T::epsilon() * a * e { clamp((b * f - c * e) / denom) } else { zero };
    let mut t = (b * s + f) / e;
    if t < zero {
        t = zero;
        s = clamp(-c / a);
    } else if t > one {
        t = one;
        s = clamp((b - c) / a);
    }
    (s1.point_at(s), s2.point_at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn seg(a: [f64; 3], b: [f64; 3]) -> Segment<f64> {
        Segment::new(p(a[0], a[1], a[2]), p(b[0], b[1], b[2])).unwrap()
    }

    /// Dense grid search over the segment parameter.
    fn grid_distance(q: &Point3<f64>, s: &Segment<f64>) -> f64 {
        (0..=100_000)
            .map(|i| q.distance(&s.point_at(i as f64 / 100_000.0)))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn distance_examples() {
        let s = seg([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(point_segment_distance(&p(0.0, 1.0, 0.0), &s), 1.0);
        assert_eq!(point_segment_distance(&p(2.0, 0.0, 0.0), &s), 1.0);
        let s2 = seg([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let q = p(3.0, 4.0, 0.0);
        let oracle = grid_distance(&q, &s2);
        assert!((oracle - 5.0).abs() < 1e-9);
        assert!((point_segment_distance(&q, &s2) - oracle).abs() < 1e-9);
    }

    #[test]
    fn containment_examples() {
        let c = Cylinder::new(seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]), 0.1).unwrap();
        assert!(cylinder_contains(&c, &p(0.5, 0.05, 0.0)));
        assert!(!cylinder_contains(&c, &p(1.05, 0.0, 0.0)));
        assert!(cylinder_contains(&c, &p(0.5, 0.1, 0.0)));
        assert!(cylinder_contains(&c, &p(0.0, 0.0, 0.0)));
        assert!(cylinder_contains(&c, &p(1.0, 0.0, 0.1)));
    }

    #[test]
    fn offset_examples() {
        let s = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(perpendicular_offset(&p(0.7, 0.0, 0.0), &s), Point3::zero());
        assert_eq!(perpendicular_offset(&p(0.5, 0.3, 0.0), &s), p(0.0, 0.3, 0.0));
    }

    #[test]
    fn overlap_examples() {
        let longer = seg([0.0, 0.0, 0.0], [2.0, 0.0, 0.0]);
        let c = OverlapSemantics::Conjunction;
        assert!(overlap(&longer, &seg([0.5, 0.1, 0.0], [1.5, 0.1, 0.0]), c));
        assert!(!overlap(&longer, &seg([3.0, 0.0, 0.0], [4.0, 0.0, 0.0]), c));
        // (1.9,0,0): (p-P1).d = 3.8 > 0 and (p-P2).d = -0.2 < 0.
        let shorter = seg([1.9, 0.0, 0.0], [2.5, 0.0, 0.0]);
        let d = longer.direction();
        assert!((shorter.a() - longer.a()).dot(&d) > 0.0);
        assert!((shorter.a() - longer.b()).dot(&d) < 0.0);
        assert!(overlap(&longer, &shorter, c));
        // The literal union accepts the disjoint case too.
        assert!(overlap(&longer, &seg([3.0, 0.0, 0.0], [4.0, 0.0, 0.0]), OverlapSemantics::PaperUnion));
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Segment::new(p(1.0, 1.0, 1.0), p(1.0, 1.0, 1.0)).is_err());
        assert!(Segment::new(p(0.0, 0.0, 0.0), p(1e-10, 0.0, 0.0)).is_err());
        assert!(Segment::new(p(f64::NAN, 0.0, 0.0), p(1.0, 0.0, 0.0)).is_err());
        let s = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert!(Cylinder::new(s, 0.0).is_err());
        assert!(Cylinder::new(s, -1.0).is_err());
    }

    #[test]
    fn closest_points_parallel_and_skew() {
        let s1 = seg([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let s2 = seg([0.5, 1.0, 1.0], [0.5, -1.0, 1.0]);
        let (c1, c2) = closest_points(&s1, &s2);
        assert!(c1.distance(&p(0.5, 0.0, 0.0)) < 1e-12);
        assert!(c2.distance(&p(0.5, 0.0, 1.0)) < 1e-12);
        let s3 = seg([2.0, 0.1, 0.0], [3.0, 0.1, 0.0]);
        let (c1, c2) = closest_points(&s1, &s3);
        assert!((c1.distance(&c2) - (1.0f64 + 0.01).sqrt()).abs() < 1e-12);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    fn point() -> impl Strategy<Value = Point3<f64>> {
        (coord(), coord(), coord()).prop_map(|(x, y, z)| p(x, y, z))
    }

    fn segment() -> impl Strategy<Value = Segment<f64>> {
        (point(), point())
            .prop_filter("non-degenerate", |(a, b)| a.distance(b) > 1e-3)
            .prop_map(|(a, b)| Segment::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn distance_symmetric_under_reversal(q in point(), s in segment()) {
            let d1 = point_segment_distance(&q, &s);
            let d2 = point_segment_distance(&q, &s.reversed());
            prop_assert!((d1 - d2).abs() <= 1e-9 * (1.0 + d1));
        }

        #[test]
        fn containment_monotone_in_radius(q in point(), s in segment(), r in 0.01..5.0f64, extra in 0.0..5.0f64) {
            let small = Cylinder::new(s, r).unwrap();
            let big = Cylinder::new(s, r + extra).unwrap();
            prop_assert!(!small.contains(&q) || big.contains(&q));
        }

        #[test]
        fn offset_orthogonal_and_matches_distance(q in point(), s in segment()) {
            let off = perpendicular_offset(&q, &s);
            prop_assert!(off.dot(&s.unit_direction()).abs() < 1e-12 * (1.0 + off.norm() + q.norm()) * 10.0);
            let t = s.project_param(&q);
            if (0.0..=1.0).contains(&t) {
                let d = point_segment_distance(&q, &s);
                prop_assert!((off.norm() - d).abs() < 1e-9);
            }
        }

        #[test]
        fn overlap_invariant_under_reversal(l in segment(), sh in segment()) {
            let (longer, shorter) = if l.length() >= sh.length() { (l, sh) } else { (sh, l) };
            let c = OverlapSemantics::Conjunction;
            let v = overlap(&longer, &shorter, c);
            prop_assert_eq!(v, overlap(&longer.reversed(), &shorter, c));
            prop_assert_eq!(v, overlap(&longer, &shorter.reversed(), c));
        }

        #[test]
        fn closest_points_not_beaten_by_sampling(s1 in segment(), s2 in segment()) {
            let (c1, c2) = closest_points(&s1, &s2);
            let best = c1.distance(&c2);
            for i in 0..=20 {
                for j in 0..=20 {
                    let d = s1.point_at(i as f64 / 20.0).distance(&s2.point_at(j as f64 / 20.0));
                    prop_assert!(best <= d + 1e-9);
                }
            }
        }
    }
}
