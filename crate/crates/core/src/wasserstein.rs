//! Degree-p Wasserstein distance between persistence diagrams.
//!
//! Ground cost is the sup-norm. Both diagrams are augmented with the diagonal
//! projections of the other's points, which turns the partial matching into a
//! square assignment problem solved exactly by the Hungarian method.

use serde::{Deserialize, Serialize};

use crate::persistence::PersistenceDiagram;

/// One end of a matched pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchEnd {
    /// Off-diagonal point; `index` refers to the diagram's expanded point list.
    Point { index: usize, birth: f64, death: f64 },
    /// Orthogonal projection of a point onto the diagonal.
    Diagonal { birth: f64, death: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub source: MatchEnd,
    pub target: MatchEnd,
    /// `||source - target||_inf^p`
    pub cost: f64,
}

/// Optimal matching. `cost` is the sum of pair costs, i.e. `WD_p^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub degree: f64,
    pub pairs: Vec<MatchedPair>,
    pub cost: f64,
}

fn check_degree(p: f64) {
    assert!(p.is_finite() && p >= 1.0, "Wasserstein degree must be >= 1, got {p}");
}

fn sup_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Sup-norm distance from `(b, d)` to the diagonal.
fn diag_dist(x: (f64, f64)) -> f64 {
    (x.1 - x.0).abs() / 2.0
}

fn projection(x: (f64, f64)) -> MatchEnd {
    let mid = (x.0 + x.1) / 2.0;
    MatchEnd::Diagonal {
        birth: mid,
        death: mid,
    }
}

/// Distance of a diagram to the empty diagram, in closed form.
pub fn wd_to_diagonal(pd: &PersistenceDiagram, p: f64) -> f64 {
    check_degree(p);
    pd.points()
        .iter()
        .map(|pt| f64::from(pt.multiplicity) * (pt.persistence() / 2.0).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn optimal_matching(pd1: &PersistenceDiagram, pd2: &PersistenceDiagram, p: f64) -> Matching {
    check_degree(p);
    let a = pd1.expanded();
    let b = pd2.expanded();
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    if n == 0 {
        return Matching {
            degree: p,
            pairs: Vec::new(),
            cost: 0.0,
        };
    }

    // rows: points of pd1, then diagonal slots; columns: points of pd2, then diagonal slots
    let mut cost = vec![0.0; n * n];
    for i in 0..n1 {
        for j in 0..n2 {
            cost[i * n + j] = sup_dist(a[i], b[j]).powf(p);
        }
        let to_diag = diag_dist(a[i]).powf(p);
        for k in 0..n1 {
            cost[i * n + n2 + k] = to_diag;
        }
    }
    for j in 0..n2 {
        let to_diag = diag_dist(b[j]).powf(p);
        for k in 0..n2 {
            cost[(n1 + k) * n + j] = to_diag;
        }
    }

    let assignment = hungarian(&cost, n);
    let mut pairs = Vec::with_capacity(n);
    for (row, &col) in assignment.iter().enumerate() {
        let c = cost[row * n + col];
        let pair = match (row < n1, col < n2) {
            (true, true) => MatchedPair {
                source: MatchEnd::Point {
                    index: row,
                    birth: a[row].0,
                    death: a[row].1,
                },
                target: MatchEnd::Point {
                    index: col,
                    birth: b[col].0,
                    death: b[col].1,
                },
                cost: c,
            },
            (true, false) => MatchedPair {
                source: MatchEnd::Point {
                    index: row,
                    birth: a[row].0,
                    death: a[row].1,
                },
                target: projection(a[row]),
                cost: c,
            },
            (false, true) => MatchedPair {
                source: projection(b[col]),
                target: MatchEnd::Point {
                    index: col,
                    birth: b[col].0,
                    death: b[col].1,
                },
                cost: c,
            },
            (false, false) => continue,
        };
        pairs.push(pair);
    }
    let total = pairs.iter().map(|pr| pr.cost).sum();
    Matching {
        degree: p,
        pairs,
        cost: total,
    }
}

/// `WD_p` between two diagrams. Exactly symmetric: the pair is put in a
/// canonical order before solving.
pub fn wd_between(pd1: &PersistenceDiagram, pd2: &PersistenceDiagram, p: f64) -> f64 {
    let (first, second) = if pd1.cmp_points(pd2).is_gt() {
        (pd2, pd1)
    } else {
        (pd1, pd2)
    };
    optimal_matching(first, second, p).cost.powf(1.0 / p)
}

/// Minimum-cost perfect assignment on a square `n x n` row-major cost matrix.
/// Returns the column assigned to each row.
///
/// Shortest augmenting path formulation with row/column potentials, O(n^3).
pub(crate) fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    // 1-based internally; index 0 is the virtual source column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}
