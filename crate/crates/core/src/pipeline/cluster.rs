//! Pairwise segment similarity and threshold-adaptive union-find clustering.

use rayon::prelude::*;

use crate::geom::{point_line_distance, Segment};
use crate::scalar::Scalar;

/// Which side of the angular gate keeps a similarity score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityBranch {
    /// Score pairs with `|cos θ| >= 0.5`.
    #[default]
    Aligned,
    /// Score pairs with `|cos θ| < 0.5`, the inequality as printed in the
    /// source formula.
    Paper,
}

impl SimilarityBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Aligned => "aligned",
            Self::Paper => "paper",
        }
    }
}

impl std::str::FromStr for SimilarityBranch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "aligned" => Ok(Self::Aligned),
            "paper" => Ok(Self::Paper),
            other => Err(format!("unknown similarity branch `{other}` (expected aligned|paper)")),
        }
    }
}

fn max_endpoint_line_distance<T: Scalar>(of: &Segment<T>, to_line_of: &Segment<T>) -> T {
    point_line_distance(&of.a(), to_line_of).max(point_line_distance(&of.b(), to_line_of))
}

/// Similarity of two undirected segments in `[0, 1)`.
///
/// `tanh(R² |cos θ|) / (1 + weight d²)` where `R` is the long/short length
/// ratio and `d` the largest distance from a short-segment endpoint to the
/// long segment's line. Equal lengths use the larger of both directions so
/// the score stays symmetric.
pub fn similarity<T: Scalar>(si: &Segment<T>, sj: &Segment<T>, weight: T, branch: SimilarityBranch) -> T {
    let cos = si.unit_direction().dot(&sj.unit_direction()).abs().min(T::one());
    let gate = T::lit(0.5);
    let admitted = match branch {
        SimilarityBranch::Aligned => cos >= gate,
        SimilarityBranch::Paper => cos < gate,
    };
    if !admitted {
        return T::zero();
    }
    let (li, lj) = (si.length(), sj.length());
    let (ratio, d) = if li > lj {
        (li / lj, max_endpoint_line_distance(sj, si))
    } else if lj > li {
        (lj / li, max_endpoint_line_distance(si, sj))
    } else {
        (T::one(), max_endpoint_line_distance(sj, si).max(max_endpoint_line_distance(si, sj)))
    };
    (ratio * ratio * cos).tanh() / (T::one() + weight * d * d)
}

/// One accepted union, kept for auditing threshold admissions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admission<T> {
    pub a: usize,
    pub b: usize,
    pub weight: T,
    pub threshold_a: T,
    pub threshold_b: T,
}

/// Disjoint-set forest with a per-component admission threshold.
#[derive(Debug, Clone)]
pub struct ClusterUniverse<T> {
    parent: Vec<usize>,
    size: Vec<usize>,
    threshold: Vec<T>,
    admissions: Vec<Admission<T>>,
}

impl<T: Scalar> ClusterUniverse<T> {
    pub fn new(n: usize, initial_threshold: T) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            threshold: vec![initial_threshold; n],
            admissions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Root of `x` with path compression.
    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Root of `x` without modifying the forest.
    pub fn root(&self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        root
    }

    /// Unites two roots by size, lower index winning ties; returns the new root.
    pub fn join(&mut self, a: usize, b: usize) -> usize {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        let (big, small) = match self.size[a].cmp(&self.size[b]) {
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Equal => (a.min(b), a.max(b)),
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        big
    }

    pub fn size(&self, x: usize) -> usize {
        self.size[self.root(x)]
    }

    pub fn threshold(&self, x: usize) -> T {
        self.threshold[self.root(x)]
    }

    pub fn admissions(&self) -> &[Admission<T>] {
        &self.admissions
    }

    /// Members of every component, each sorted, ordered by smallest member.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; self.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.len() {
            let r = self.root(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Groups segments by admitting low-dissimilarity pairs under an adaptive
/// per-component threshold.
///
/// Dissimilarity is `1 - similarity`; pairs with zero similarity get no edge.
/// Edges are visited in ascending dissimilarity, ties in pair order. A pair
/// joins two components when its dissimilarity is within both components'
/// thresholds; the merged component's threshold becomes
/// `dissimilarity + c / size`.
pub fn cluster<T: Scalar>(
    segments: &[Segment<T>],
    weight: T,
    c: T,
    branch: SimilarityBranch,
) -> ClusterUniverse<T> {
    let n = segments.len();
    let mut edges: Vec<(T, usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            ((i + 1)..n).filter_map(move |j| {
                let s = similarity(&segments[i], &segments[j], weight, branch);
                (s > T::zero()).then(|| (T::one() - s, i, j))
            })
        })
        .collect();
    edges.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("similarity is finite"));

    let mut u = ClusterUniverse::new(n, c);
    for (w, i, j) in edges {
        let a = u.find(i);
        let b = u.find(j);
        if a == b {
            continue;
        }
        let (ta, tb) = (u.threshold[a], u.threshold[b]);
        if w <= ta && w <= tb {
            let r = u.join(a, b);
            u.threshold[r] = w + c / T::from_usize_lossy(u.size[r]);
            u.admissions.push(Admission { a: i, b: j, weight: w, threshold_a: ta, threshold_b: tb });
        }
    }
    u
}
