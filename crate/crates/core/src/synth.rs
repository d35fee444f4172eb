//! Synthetic wireframe scenes: edge-concentrated point clouds, defect
//! injection with a traceable manifest, and a linear-scan evaluator that
//! mirrors [`crate::metrics::evaluate`] without the octree.

use std::fmt::{self, Write as _};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::error::{Error, Result};
use crate::geom::{closest_points, cylinder_contains, point_segment_distance, Aabb, Cylinder, Point3, Segment};
use crate::metrics::{assemble, EvalConfig, EvalReport};
use crate::pipeline::SegmentStats;
use crate::scalar::Scalar;
use crate::spatial_index::GaussianCloud;

/// The 12 edges of an axis-aligned cube with one corner at the origin.
pub fn cube_wireframe<T: Scalar>(side: T) -> Vec<Segment<T>> {
    let s = side.to_f64_lossy();
    let corner = |i: usize| Point3::new(T::lit((i & 1) as f64 * s), T::lit((i >> 1 & 1) as f64 * s), T::lit((i >> 2 & 1) as f64 * s));
    let mut edges = Vec::with_capacity(12);
    for i in 0..8usize {
        for bit in [1usize, 2, 4] {
            if i & bit == 0 {
                edges.push(Segment::new(corner(i), corner(i | bit)).expect("cube side must be positive"));
            }
        }
    }
    edges
}

/// `count` parallel edges along +x, `spacing` apart along +y.
pub fn parallel_edges<T: Scalar>(count: usize, length: T, spacing: T) -> Vec<Segment<T>> {
    (0..count)
        .map(|i| {
            let y = spacing * T::from_usize_lossy(i);
            Segment::new(Point3::new(T::zero(), y, T::zero()), Point3::new(length, y, T::zero()))
                .expect("edge length must be positive")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams<T> {
    pub points_per_meter: T,
    /// Standard deviation of the isotropic jitter, meters.
    pub noise_sigma: T,
    /// Share of the final cloud made of uniform background points, in `[0, 1)`.
    pub background_fraction: T,
}

impl<T: Scalar> Default for SceneParams<T> {
    fn default() -> Self {
        Self { points_per_meter: T::lit(500.0), noise_sigma: T::lit(0.005), background_fraction: T::zero() }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene<T> {
    pub ground_truth_edges: Vec<Segment<T>>,
    pub cloud: GaussianCloud<T>,
    pub noise_sigma: T,
    pub points_per_meter: T,
    pub background_fraction: T,
    pub rng_seed: u64,
}

fn to_p<T: Scalar>(v: [f64; 3]) -> Point3<T> {
    Point3::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
}

fn of_p<T: Scalar>(p: &Point3<T>) -> [f64; 3] {
    [p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()]
}

/// Samples each edge at evenly spaced stations `(i + 0.5) / n`, jitters every
/// sample with isotropic Gaussian noise, then adds uniform background points
/// in the edge bounds.
pub fn generate_scene<T: Scalar>(edges: &[Segment<T>], params: &SceneParams<T>, seed: u64) -> Result<SyntheticScene<T>> {
    let ppm = params.points_per_meter.to_f64_lossy();
    let sigma = params.noise_sigma.to_f64_lossy();
    let bg = params.background_fraction.to_f64_lossy();
    if !(ppm.is_finite() && ppm >= 0.0) {
        return Err(Error::Geometry("points_per_meter must be finite and >= 0".into()));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Geometry("noise_sigma must be finite and >= 0".into()));
    }
    if !(0.0..1.0).contains(&bg) {
        return Err(Error::Geometry("background_fraction must lie in [0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma checked finite and non-negative");
    let mut points = Vec::new();
    for e in edges {
        let (a, b) = (of_p(&e.a()), of_p(&e.b()));
        let n = (ppm * e.length().to_f64_lossy()).round() as usize;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let mut p = [0.0; 3];
            for k in 0..3 {
                p[k] = a[k] + (b[k] - a[k]) * t + noise.sample(&mut rng);
            }
            points.push(to_p(p));
        }
    }
    if bg > 0.0 {
        if let Some(bb) = Aabb::from_segments(edges) {
            let (lo, hi) = (of_p(&bb.min), of_p(&bb.max));
            let count = (bg / (1.0 - bg) * points.len() as f64).round() as usize;
            for _ in 0..count {
                let mut p = [0.0; 3];
                for k in 0..3 {
                    p[k] = lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>();
                }
                points.push(to_p(p));
            }
        }
    }
    Ok(SyntheticScene {
        ground_truth_edges: edges.to_vec(),
        cloud: GaussianCloud::new(points),
        noise_sigma: params.noise_sigma,
        points_per_meter: params.points_per_meter,
        background_fraction: params.background_fraction,
        rng_seed: seed,
    })
}

/// Magnitudes of the five defect classes. Zero disables a class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectSpec<T> {
    /// Length of the perpendicular offset applied to every edge, meters.
    pub position_bias: T,
    /// Extra length added past one randomly chosen end, as a fraction of the
    /// edge length.
    pub overextension: T,
    /// Number of spurious segments placed in empty space.
    pub outliers: usize,
    pub outlier_length: T,
    /// Minimum distance from an outlier to every edge, meters.
    pub outlier_clearance: T,
    /// Jittered copies emitted alongside every (piece of an) edge.
    pub duplication: usize,
    /// Largest endpoint displacement of a copy, meters.
    pub duplicate_jitter: T,
    /// Number of cuts per edge.
    pub discontinuity: usize,
    /// Length removed at every cut, meters.
    pub gap: T,
}

impl<T: Scalar> Default for DefectSpec<T> {
    fn default() -> Self {
        Self {
            position_bias: T::zero(),
            overextension: T::zero(),
            outliers: 0,
            outlier_length: T::lit(0.3),
            outlier_clearance: T::zero(),
            duplication: 0,
            duplicate_jitter: T::zero(),
            discontinuity: 0,
            gap: T::zero(),
        }
    }
}

impl<T: Scalar> DefectSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("position_bias", self.position_bias),
            ("overextension", self.overextension),
            ("outlier_length", self.outlier_length),
            ("outlier_clearance", self.outlier_clearance),
            ("duplicate_jitter", self.duplicate_jitter),
            ("gap", self.gap),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::Geometry(format!("defect magnitude `{name}` must be finite and >= 0")));
            }
        }
        if self.outliers > 0 && self.outlier_length <= T::zero() {
            return Err(Error::Geometry("outlier_length must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defect {
    PositionBias,
    Overextension { tail: Tail },
    Outlier,
    /// `copy` counts from 1; the unjittered original carries no tag.
    Duplicate { copy: usize },
    Piece { index: usize, of: usize },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::PositionBias => f.write_str("bias"),
            Defect::Overextension { tail: Tail::A } => f.write_str("overextend:a"),
            Defect::Overextension { tail: Tail::B } => f.write_str("overextend:b"),
            Defect::Outlier => f.write_str("outlier"),
            Defect::Duplicate { copy } => write!(f, "duplicate:{copy}"),
            Defect::Piece { index, of } => write!(f, "piece:{index}/{of}"),
        }
    }
}

impl std::str::FromStr for Defect {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("unknown defect token `{s}`");
        Ok(match s {
            "bias" => Defect::PositionBias,
            "overextend:a" => Defect::Overextension { tail: Tail::A },
            "overextend:b" => Defect::Overextension { tail: Tail::B },
            "outlier" => Defect::Outlier,
            _ => {
                if let Some(k) = s.strip_prefix("duplicate:") {
                    Defect::Duplicate { copy: k.parse().map_err(|_| bad())? }
                } else if let Some(rest) = s.strip_prefix("piece:") {
                    let (i, n) = rest.split_once('/').ok_or_else(bad)?;
                    Defect::Piece { index: i.parse().map_err(|_| bad())?, of: n.parse().map_err(|_| bad())? }
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// Provenance of one output segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Source edge; `None` for outliers.
    pub edge: Option<usize>,
    pub defects: Vec<Defect>,
}

/// Manifest text schema, one line per output segment in output order:
///
/// ```text
/// <segment index> <edge index | -> <token>...
/// ```
///
/// Tokens: `bias`, `overextend:a|b`, `outlier`, `duplicate:<k>`,
/// `piece:<i>/<n>`, or the single token `clean`. Lines starting with `#`
/// are comments.
pub fn render_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::from("# segment edge defects\n");
    for (i, e) in entries.iter().enumerate() {
        let edge = e.edge.map_or_else(|| "-".to_string(), |k| k.to_string());
        let _ = write!(out, "{i} {edge}");
        if e.defects.is_empty() {
            out.push_str(" clean");
        }
        for d in &e.defects {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |reason: String| Error::Parse { path: "manifest".into(), line: ln + 1, reason };
        let mut toks = line.split_whitespace();
        let idx: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fail("missing segment index".into()))?;
        if idx != entries.len() {
            return Err(fail(format!("expected segment index {}, found {idx}", entries.len())));
        }
        let edge = match toks.next() {
            Some("-") => None,
            Some(t) => Some(t.parse().map_err(|_| fail(format!("bad edge index `{t}`")))?),
            None => return Err(fail("missing edge index".into())),
        };
        let mut defects = Vec::new();
        for t in toks {
            if t != "clean" {
                defects.push(t.parse().map_err(fail)?);
            }
        }
        entries.push(ManifestEntry { edge, defects });
    }
    Ok(entries)
}

#[derive(Debug, Clone)]
pub struct DefectedSegments<T> {
    pub segments: Vec<Segment<T>>,
    pub manifest: Vec<ManifestEntry>,
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    UnitSphere.sample(rng)
}

fn random_perpendicular(rng: &mut ChaCha8Rng, d: [f64; 3]) -> [f64; 3] {
    loop {
        let u = unit_vector(rng);
        let dot = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
        let v = [u[0] - dot * d[0], u[1] - dot * d[1], u[2] - dot * d[2]];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Uniform point in the ball of radius `r`.
fn ball(rng: &mut ChaCha8Rng, r: f64) -> [f64; 3] {
    let u = unit_vector(rng);
    let s = r * rng.gen::<f64>().cbrt();
    [u[0] * s, u[1] * s, u[2] * s]
}

const OUTLIER_ATTEMPTS: usize = 100_000;

/// Applies the enabled defect classes to every edge, in the order bias →
/// overextension → cuts → duplication, then appends the outliers.
pub fn inject_defects<T: Scalar>(edges: &[Segment<T>], spec: &DefectSpec<T>, seed: u64) -> Result<DefectedSegments<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::new();
    let mut manifest = Vec::new();
    let zero = T::zero();

    for (ei, edge) in edges.iter().enumerate() {
        let mut s = *edge;
        let mut tags = Vec::new();
        if spec.position_bias > zero {
            let d = of_p(&s.unit_direction());
            let v = random_perpendicular(&mut rng, d);
            s = s.translated(to_p::<T>(v) * spec.position_bias);
            tags.push(Defect::PositionBias);
        }
        if spec.overextension > zero {
            let extra = s.direction() * spec.overextension;
            let tail = if rng.gen::<bool>() { Tail::B } else { Tail::A };
            s = match tail {
                Tail::B => Segment::new(s.a(), s.b() + extra)?,
                Tail::A => Segment::new(s.a() - extra, s.b())?,
            };
            tags.push(Defect::Overextension { tail });
        }
        let pieces = if spec.discontinuity > 0 {
            let cuts = spec.discontinuity;
            let len = s.length();
            let piece = (len - spec.gap * T::from_usize_lossy(cuts)) / T::from_usize_lossy(cuts + 1);
            if piece <= zero {
                return Err(Error::Geometry(format!("edge {ei} is too short for {cuts} cuts of the requested gap")));
            }
            (0..=cuts)
                .map(|k| {
                    let t0 = T::from_usize_lossy(k) * (piece + spec.gap) / len;
                    let t1 = (T::from_usize_lossy(k) * (piece + spec.gap) + piece) / len;
                    let mut t = tags.clone();
                    t.push(Defect::Piece { index: k, of: cuts + 1 });
                    Ok((s.sub_segment(t0, t1.min(T::one()))?, t))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![(s, tags)]
        };
        for (piece, tags) in pieces {
            segments.push(piece);
            manifest.push(ManifestEntry { edge: Some(ei), defects: tags.clone() });
            let j = spec.duplicate_jitter.to_f64_lossy();
            for copy in 1..=spec.duplication {
                let ja: Point3<T> = to_p(ball(&mut rng, j));
                let jb: Point3<T> = to_p(ball(&mut rng, j));
                let dup = Segment::new(piece.a() + ja, piece.b() + jb).unwrap_or(piece);
                segments.push(dup);
                let mut t = tags.clone();
                t.push(Defect::Duplicate { copy });
                manifest.push(ManifestEntry { edge: Some(ei), defects: t });
            }
        }
    }

    if spec.outliers > 0 {
        let region = Aabb::from_segments(edges).ok_or(Error::EmptyInput("edges"))?;
        let (lo, hi) = (of_p(&region.min), of_p(&region.max));
        let half = spec.outlier_length.to_f64_lossy() / 2.0;
        let clearance = spec.outlier_clearance;
        let mut placed = 0;
        let mut attempts = 0;
        while placed < spec.outliers {
            attempts += 1;
            if attempts > OUTLIER_ATTEMPTS {
                return Err(Error::Geometry(format!(
                    "could not place outlier {} of {} with clearance {clearance}",
                    placed + 1,
                    spec.outliers
                )));
            }
            let mut m = [0.0; 3];
            for k in 0..3 {
                m[k] = lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>();
            }
            let u = unit_vector(&mut rng);
            let a = to_p::<T>([m[0] - u[0] * half, m[1] - u[1] * half, m[2] - u[2] * half]);
            let b = to_p::<T>([m[0] + u[0] * half, m[1] + u[1] * half, m[2] + u[2] * half]);
            if !(region.contains(&a) && region.contains(&b)) {
                continue;
            }
            let Ok(cand) = Segment::new(a, b) else { continue };
            if edges.iter().all(|e| segment_distance(&cand, e) > clearance) {
                segments.push(cand);
                manifest.push(ManifestEntry { edge: None, defects: vec![Defect::Outlier] });
                placed += 1;
            }
        }
    }
    Ok(DefectedSegments { segments, manifest })
}

/// Shortest distance between two segments.
pub fn segment_distance<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> T {
    let (p, q) = closest_points(s1, s2);
    p.distance(&q)
}

/// Linear-scan mirror of [`crate::metrics::evaluate`] over the points of
/// `cloud` inside `bbox`.
pub fn brute_force_evaluate<T: Scalar>(
    segments: &[Segment<T>],
    cloud: &GaussianCloud<T>,
    bbox: Aabb<T>,
    ecfg: &EvalConfig<T>,
) -> Result<EvalReport<T>> {
    ecfg.validate()?;
    if !bbox.is_valid() {
        return Err(Error::DegenerateBoundingBox);
    }
    if segments.is_empty() {
        return Err(Error::NothingToEvaluate);
    }
    let pts = cloud.points();
    let inside: Vec<usize> = (0..pts.len()).filter(|&i| bbox.contains(&pts[i])).collect();
    let mut nearest: Vec<Option<T>> = vec![None; pts.len()];
    let mut per_segment = Vec::with_capacity(segments.len());
    for s in segments {
        let c = Cylinder::new(*s, ecfg.eval_radius)?;
        let mut n = 0usize;
        let mut sq = Vec::new();
        for &i in &inside {
            if cylinder_contains(&c, &pts[i]) {
                let d = point_segment_distance(&pts[i], s);
                sq.push(d * d);
                n += 1;
                nearest[i] = Some(nearest[i].map_or(d, |m: T| m.min(d)));
            }
        }
        let e_rms = if n == 0 { T::zero() } else { (sq.into_iter().sum::<T>() / T::from_usize_lossy(n)).sqrt() };
        per_segment.push(SegmentStats { covered_count: n, density: T::from_usize_lossy(n) / s.length(), e_rms });
    }
    let nearest: Vec<T> = nearest.into_iter().flatten().collect();
    Ok(assemble(segments, per_segment, &nearest, inside.len(), ecfg.eval_radius, ecfg.score_scaler))
}
