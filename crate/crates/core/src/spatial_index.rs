//! Static octree over Gaussian centers with exact capped-cylinder queries.
//!
//! Nodes are stored in a flat arena; the eight children of an inner node are
//! contiguous. Leaf points are copied into a node-ordered buffer so a leaf
//! scan touches contiguous memory. Pruning is conservative and every
//! candidate point is re-checked with [`cylinder_contains`], so queries are
//! exact.

use crate::error::{Error, Result};
use crate::geom::{cylinder_contains, point_segment_distance, Aabb, Cylinder, Point3};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_DEPTH: usize = 10;
pub const DEFAULT_LEAF_CAPACITY: usize = 32;

/// The Gaussian centers of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCloud<T> {
    points: Vec<Point3<T>>,
    bbox: Option<Aabb<T>>,
}

impl<T: Scalar> GaussianCloud<T> {
    /// Builds a cloud with its tight bounding box.
    pub fn new(points: Vec<Point3<T>>) -> Self {
        let bbox = Aabb::from_points(&points);
        Self { points, bbox }
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Tight bounds; `None` for an empty cloud.
    pub fn bbox(&self) -> Option<Aabb<T>> {
        self.bbox
    }

    pub fn into_points(self) -> Vec<Point3<T>> {
        self.points
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    bbox: Aabb<T>,
    start: usize,
    end: usize,
    depth: usize,
    first_child: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Octree<T> {
    bbox: Aabb<T>,
    max_depth: usize,
    leaf_capacity: usize,
    nodes: Vec<Node<T>>,
    points: Vec<Point3<T>>,
    indices: Vec<usize>,
    dropped: usize,
}

impl<T: Scalar> Octree<T> {
    /// Indexes the cloud points lying inside `seed_bbox`; the rest are dropped
    /// and counted.
    pub fn build(
        cloud: &GaussianCloud<T>,
        max_depth: usize,
        leaf_capacity: usize,
        seed_bbox: Aabb<T>,
    ) -> Result<Self> {
        if !seed_bbox.is_valid() {
            return Err(Error::DegenerateBoundingBox);
        }
        if max_depth < 1 {
            return Err(Error::OctreeParam("max_depth must be >= 1".into()));
        }
        if leaf_capacity < 1 {
            return Err(Error::OctreeParam("leaf_capacity must be >= 1".into()));
        }
        let mut indices: Vec<usize> = (0..cloud.len())
            .filter(|&i| seed_bbox.contains(&cloud.points[i]))
            .collect();
        let dropped = cloud.len() - indices.len();

        let mut tree = Octree {
            bbox: seed_bbox,
            max_depth,
            leaf_capacity,
            nodes: Vec::new(),
            points: Vec::new(),
            indices: Vec::new(),
            dropped,
        };
        let n = indices.len();
        tree.nodes.push(Node { bbox: seed_bbox, start: 0, end: n, depth: 0, first_child: None });
        let mut scratch = Vec::with_capacity(n);
        tree.subdivide(0, &cloud.points, &mut indices, &mut scratch);
        tree.points = indices.iter().map(|&i| cloud.points[i]).collect();
        tree.indices = indices;
        Ok(tree)
    }

    /// Builds with the default depth and leaf capacity.
    pub fn with_defaults(cloud: &GaussianCloud<T>, seed_bbox: Aabb<T>) -> Result<Self> {
        Self::build(cloud, DEFAULT_MAX_DEPTH, DEFAULT_LEAF_CAPACITY, seed_bbox)
    }

    fn subdivide(&mut self, node: usize, pts: &[Point3<T>], indices: &mut [usize], scratch: &mut Vec<usize>) {
        let Node { bbox, start, end, depth, .. } = self.nodes[node].clone();
        if end - start <= self.leaf_capacity || depth >= self.max_depth {
            return;
        }
        let c = bbox.center();
        let octant = |p: &Point3<T>| -> usize {
            (usize::from(p.x >= c.x)) | (usize::from(p.y >= c.y) << 1) | (usize::from(p.z >= c.z) << 2)
        };

        // Stable counting sort of the node's range by octant.
        let slice = &mut indices[start..end];
        let mut counts = [0usize; 8];
        for &i in slice.iter() {
            counts[octant(&pts[i])] += 1;
        }
        let mut offsets = [0usize; 8];
        for k in 1..8 {
            offsets[k] = offsets[k - 1] + counts[k - 1];
        }
        scratch.clear();
        scratch.resize(slice.len(), 0);
        let mut cursor = offsets;
        for &i in slice.iter() {
            let o = octant(&pts[i]);
            scratch[cursor[o]] = i;
            cursor[o] += 1;
        }
        slice.copy_from_slice(scratch);

        let first = self.nodes.len();
        for k in 0..8 {
            let lo = Point3::new(
                if k & 1 == 0 { bbox.min.x } else { c.x },
                if k & 2 == 0 { bbox.min.y } else { c.y },
                if k & 4 == 0 { bbox.min.z } else { c.z },
            );
            let hi = Point3::new(
                if k & 1 == 0 { c.x } else { bbox.max.x },
                if k & 2 == 0 { c.y } else { bbox.max.y },
                if k & 4 == 0 { c.z } else { bbox.max.z },
            );
            self.nodes.push(Node {
                bbox: Aabb::new(lo, hi),
                start: start + offsets[k],
                end: start + offsets[k] + counts[k],
                depth: depth + 1,
                first_child: None,
            });
        }
        self.nodes[node].first_child = Some(first);
        for k in 0..8 {
            self.subdivide(first + k, pts, indices, scratch);
        }
    }

    pub fn bbox(&self) -> Aabb<T> {
        self.bbox
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    /// Number of points inside the seed box.
    pub fn indexed_len(&self) -> usize {
        self.indices.len()
    }

    /// Number of input points rejected by the seed box.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Cloud indices of the indexed points, in node order.
    pub fn indexed_indices(&self) -> &[usize] {
        &self.indices
    }

    /// Depth of the deepest node.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Calls `f(cloud_index, point)` for every indexed point inside `c`, in
    /// node order.
    pub fn visit_cylinder<F: FnMut(usize, &Point3<T>)>(&self, c: &Cylinder<T>, mut f: F) {
        if self.indices.is_empty() {
            return;
        }
        let cbox = c.bounding_box();
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.start == node.end || !node.bbox.intersects(&cbox) || !node_cylinder_intersects(&node.bbox, c) {
                continue;
            }
            match node.first_child {
                Some(first) => stack.extend((first..first + 8).rev()),
                None => {
                    for k in node.start..node.end {
                        let p = &self.points[k];
                        if cylinder_contains(c, p) {
                            f(self.indices[k], p);
                        }
                    }
                }
            }
        }
    }

    /// Sorted cloud indices of all indexed points inside `c`.
    pub fn query_cylinder(&self, c: &Cylinder<T>) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_cylinder(c, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn count_cylinder(&self, c: &Cylinder<T>) -> usize {
        let mut n = 0;
        self.visit_cylinder(c, |_, _| n += 1);
        n
    }

    /// Checks the structural invariants; used by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = vec![false; self.indices.len()];
        for (ni, node) in self.nodes.iter().enumerate() {
            if node.depth > self.max_depth {
                return Err(format!("node {ni} deeper than max_depth"));
            }
            for k in node.start..node.end {
                if !node.bbox.contains(&self.points[k]) {
                    return Err(format!("point slot {k} outside node {ni}"));
                }
            }
            match node.first_child {
                Some(first) => {
                    let kids = &self.nodes[first..first + 8];
                    if kids[0].start != node.start || kids[7].end != node.end {
                        return Err(format!("children of {ni} do not cover its range"));
                    }
                    for w in kids.windows(2) {
                        if w[0].end != w[1].start {
                            return Err(format!("children of {ni} not contiguous"));
                        }
                    }
                }
                None => {
                    for s in seen.iter_mut().take(node.end).skip(node.start) {
                        if *s {
                            return Err("point stored in two leaves".into());
                        }
                        *s = true;
                    }
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err("indexed point missing from leaves".into())
        }
    }
}

/// Conservative box/cylinder overlap test: never false when the box holds a
/// point of the solid cylinder.
///
/// Any point of the box is within half the box diagonal of its center, and
/// any point of the cylinder is within `radius` of the axis segment.
pub fn node_cylinder_intersects<T: Scalar>(bbox: &Aabb<T>, c: &Cylinder<T>) -> bool {
    point_segment_distance(&bbox.center(), c.axis()) <= c.radius() + bbox.half_diagonal()
}
