//! Metric spaces and link instances.
//!
//! A [`MetricSpace`] is either a set of points in the Euclidean plane or an
//! explicit distance table validated against the metric axioms. An
//! [`Instance`] indexes sender/receiver pairs into a space; every link must
//! have strictly positive length (a co-located sender/receiver pair has no
//! meaningful SINR), but endpoints of *distinct* links may coincide.
//!
//! Both types are immutable after construction and safe to share across
//! threads.

use std::fmt;

/// Additive tolerance for the triangle-inequality check on distance tables.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Construction-time validation failure for spaces and instances.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    /// Distance table is not square (row index, row length, expected).
    NonSquare { row: usize, len: usize, expected: usize },
    /// Entry is negative or non-finite.
    BadEntry { i: usize, j: usize, value: f64 },
    /// Diagonal entry `d[i][i]` is not zero.
    NonzeroDiagonal { i: usize, value: f64 },
    /// `d[i][j] != d[j][i]`.
    Asymmetric { i: usize, j: usize },
    /// `d[i][k] > d[i][j] + d[j][k] + TRIANGLE_TOL`.
    TriangleViolation { i: usize, j: usize, k: usize },
    /// Point coordinate is NaN or infinite.
    BadCoordinate { point: usize },
    /// Link endpoint index is out of range.
    IndexOutOfRange { link: usize, index: usize, points: usize },
    /// Link has zero (or sub-tolerance) length.
    ZeroLengthLink { link: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MetricError::NonSquare { row, len, expected } => {
                write!(f, "distance table row {row} has {len} entries, expected {expected}")
            }
            MetricError::BadEntry { i, j, value } => {
                write!(f, "distance d[{i}][{j}] = {value} is negative or non-finite")
            }
            MetricError::NonzeroDiagonal { i, value } => {
                write!(f, "diagonal entry d[{i}][{i}] = {value} must be zero")
            }
            MetricError::Asymmetric { i, j } => {
                write!(f, "distance table is asymmetric at ({i}, {j})")
            }
            MetricError::TriangleViolation { i, j, k } => {
                write!(f, "triangle inequality fails: d[{i}][{k}] > d[{i}][{j}] + d[{j}][{k}]")
            }
            MetricError::BadCoordinate { point } => {
                write!(f, "point {point} has a non-finite coordinate")
            }
            MetricError::IndexOutOfRange { link, index, points } => {
                write!(f, "link {link} references point {index}, but the space has {points} points")
            }
            MetricError::ZeroLengthLink { link } => {
                write!(f, "link {link} has zero length (sender and receiver coincide)")
            }
        }
    }
}

impl std::error::Error for MetricError {}

/// An immutable finite metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    /// Points in the plane; distances are computed on demand.
    Euclidean2d { points: Vec<[f64; 2]> },
    /// Explicit distance table, validated by [`MetricSpace::from_table`].
    Matrix { d: Vec<Vec<f64>> },
}

impl MetricSpace {
    /// Builds a planar space. Coordinates must be finite.
    pub fn euclidean(points: Vec<[f64; 2]>) -> Result<Self, MetricError> {
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(MetricError::BadCoordinate { point: i });
            }
        }
        Ok(MetricSpace::Euclidean2d { points })
    }

    /// Builds a space from an explicit distance table, checking every metric
    /// axiom exhaustively: square shape, finite non-negative entries, zero
    /// diagonal, symmetry, and the triangle inequality over all `O(n³)`
    /// triples (with additive tolerance [`TRIANGLE_TOL`]). The first violated
    /// axiom is reported with its witness indices.
    // Index loops keep the witness indices the errors report in plain view.
    #[allow(clippy::needless_range_loop)]
    pub fn from_table(d: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let n = d.len();
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NonSquare { row: i, len: row.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = d[i][j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MetricError::BadEntry { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            if d[i][i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i, value: d[i][i] });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if d[i][j] != d[j][i] {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if d[i][k] > d[i][j] + d[j][k] + TRIANGLE_TOL {
                        return Err(MetricError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(MetricSpace::Matrix { d })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Euclidean2d { points } => points.len(),
            MetricSpace::Matrix { d } => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance between two points; errors on out-of-range indices.
    pub fn distance(&self, a: usize, b: usize) -> Result<f64, MetricError> {
        let n = self.len();
        for &idx in &[a, b] {
            if idx >= n {
                return Err(MetricError::IndexOutOfRange { link: usize::MAX, index: idx, points: n });
            }
        }
        Ok(self.dist(a, b))
    }

    /// Unchecked distance; callers guarantee the indices are in range.
    pub(crate) fn dist(&self, a: usize, b: usize) -> f64 {
        match self {
            MetricSpace::Euclidean2d { points } => {
                let (p, q) = (points[a], points[b]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            }
            MetricSpace::Matrix { d } => d[a][b],
        }
    }
}

/// One sender/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    /// Index of the link within its instance.
    pub id: usize,
    /// Point index of the sender.
    pub sender: usize,
    /// Point index of the receiver.
    pub receiver: usize,
    /// Cached `d(sender, receiver)`, always > 0.
    pub length: f64,
}

/// A set of links over a metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    space: MetricSpace,
    links: Vec<Link>,
    l_min: f64,
    l_max: f64,
}

impl Instance {
    /// Validates endpoint indices and positive lengths, then caches link
    /// lengths and the length extremes.
    pub fn new(space: MetricSpace, pairs: &[(usize, usize)]) -> Result<Self, MetricError> {
        let n_points = space.len();
        let mut links = Vec::with_capacity(pairs.len());
        let (mut l_min, mut l_max) = (f64::INFINITY, 0.0f64);
        for (id, &(s, r)) in pairs.iter().enumerate() {
            if s >= n_points {
                return Err(MetricError::IndexOutOfRange { link: id, index: s, points: n_points });
            }
            if r >= n_points {
                return Err(MetricError::IndexOutOfRange { link: id, index: r, points: n_points });
            }
            let length = space.dist(s, r);
            if length <= 0.0 {
                return Err(MetricError::ZeroLengthLink { link: id });
            }
            l_min = l_min.min(length);
            l_max = l_max.max(length);
            links.push(Link { id, sender: s, receiver: r, length });
        }
        if links.is_empty() {
            // Degenerate but allowed: schedulers map it to the empty schedule.
            l_min = 1.0;
            l_max = 1.0;
        }
        Ok(Instance { space, links, l_min, l_max })
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Number of links.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// Length diversity `l_max / l_min` (1.0 for an empty instance).
    pub fn delta(&self) -> f64 {
        self.l_max / self.l_min
    }

    /// Distance from the sender of `w` to the receiver of `v` — the path an
    /// interfering signal travels.
    pub fn cross_distance(&self, w: usize, v: usize) -> f64 {
        self.space.dist(self.links[w].sender, self.links[v].receiver)
    }
}
