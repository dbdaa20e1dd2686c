//! 0-dimensional persistent homology of the Rips filtration.
//!
//! In dimension zero every point is born at scale 0 and a component dies when
//! an edge first joins it to another component, so the finite deaths are the
//! edge weights picked by Kruskal's algorithm on the complete distance graph.
//! The component that survives forever is not recorded.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix of Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }
}

pub fn pairwise_distances(points: &[Vec<f64>]) -> Result<DistanceMatrix> {
    let m = points.len();
    if m == 0 {
        return Err(Error::Validation("distance matrix needs at least one point".into()));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::Validation(format!(
            "point of dimension {} among points of dimension {dim}",
            p.len()
        )));
    }
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            entries[i * m + j] = d;
            entries[j * m + i] = d;
        }
    }
    Ok(DistanceMatrix { size: m, entries })
}

/// A point of a persistence diagram with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
}

impl DiagramPoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Finite part of a persistence diagram. Points are kept sorted by
/// `(birth, death)` with exact duplicates merged into one multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub homology_dim: usize,
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn empty(homology_dim: usize) -> Self {
        Self {
            homology_dim,
            points: Vec::new(),
        }
    }

    /// Builds a diagram from `(birth, death)` pairs, merging equal pairs.
    pub fn from_pairs(
        homology_dim: usize,
        pairs: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if let Some(&(b, d)) = pairs
            .iter()
            .find(|(b, d)| !(b.is_finite() && d.is_finite() && d >= b))
        {
            return Err(Error::Validation(format!(
                "diagram point ({b}, {d}) must be finite with death >= birth"
            )));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut points: Vec<DiagramPoint> = Vec::with_capacity(pairs.len());
        for (birth, death) in pairs {
            match points.last_mut() {
                Some(last) if last.birth == birth && last.death == death => last.multiplicity += 1,
                _ => points.push(DiagramPoint {
                    birth,
                    death,
                    multiplicity: 1,
                }),
            }
        }
        Ok(Self {
            homology_dim,
            points,
        })
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    /// Number of off-diagonal points counted with multiplicity.
    pub fn len(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points repeated according to their multiplicity, in sorted order.
    pub fn expanded(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n((p.birth, p.death), p.multiplicity as usize))
            .collect()
    }

    pub fn deaths(&self) -> Vec<f64> {
        self.expanded().into_iter().map(|(_, d)| d).collect()
    }

    /// Multiplies every coordinate by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            homology_dim: self.homology_dim,
            points: self
                .points
                .iter()
                .map(|p| DiagramPoint {
                    birth: p.birth * c,
                    death: p.death * c,
                    multiplicity: p.multiplicity,
                })
                .collect(),
        }
    }

    pub(crate) fn cmp_points(&self, other: &Self) -> Ordering {
        let a = self.expanded();
        let b = other.expanded();
        a.len().cmp(&b.len()).then_with(|| {
            a.iter()
                .zip(&b)
                .map(|(x, y)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Returns false when both nodes were already in the same set.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] += 1;
        }
        true
    }
}

/// H0 diagram of the Rips filtration over the given distances.
///
/// Edges are processed by `(weight, i, j)`; each edge that merges two
/// components contributes a point `(0, weight)`.
pub fn h0_persistence(d: &DistanceMatrix) -> PersistenceDiagram {
    let m = d.size();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((d.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut uf = UnionFind::new(m);
    let mut deaths = Vec::with_capacity(m.saturating_sub(1));
    for (w, i, j) in edges {
        if uf.union(i, j) {
            deaths.push(w);
            if deaths.len() + 1 == m {
                break;
            }
        }
    }
    PersistenceDiagram::from_pairs(0, deaths.into_iter().map(|w| (0.0, w)))
        .expect("distances are finite and nonnegative")
}

/// Convenience wrapper: distances then H0.
pub fn h0_from_points(points: &[Vec<f64>]) -> Result<PersistenceDiagram> {
    Ok(h0_persistence(&pairwise_distances(points)?))
}
