//! Envelope (skyline) Cholesky factorization with reverse Cuthill–McKee
//! ordering, for the shifted Schrödinger matrix.

use std::collections::VecDeque;

use crate::ddg::SparseSymOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool], order: &mut Vec<usize>, degree: &[usize]) {
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
        next.sort_by_key(|&w| (degree[w], w));
        for w in next {
            seen[w] = true;
            queue.push_back(w);
        }
    }
}

/// Last vertex reached by BFS from `start` (a far-away vertex).
fn farthest(adj: &[Vec<usize>], start: usize, degree: &[usize]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut order = Vec::with_capacity(adj.len());
    bfs_levels(adj, start, &mut seen, &mut order, degree);
    *order.last().unwrap_or(&start)
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub(crate) fn reverse_cuthill_mckee(a: &SparseSymOperator) -> Vec<usize> {
    let n = a.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        // two sweeps to approximate a peripheral start vertex
        let start = farthest(&adj, farthest(&adj, root, &degree), &degree);
        let start = if seen[start] { root } else { start };
        bfs_levels(&adj, start, &mut seen, &mut order, &degree);
    }
    order.reverse();
    order
}

/// Lower-triangular factor stored by rows over each row's envelope.
#[derive(Debug, Clone)]
pub(crate) struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    pub(crate) fn factor(a: &SparseSymOperator) -> Result<Self, NotPositiveDefinite> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                first[new] = first[new].min(inverse[j]);
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for i in 0..n {
            row_start.push(row_start[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; row_start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let col = inverse[j];
                if col <= new {
                    values[row_start[new] + col - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let ri = row_start[i];
            for j in first[i]..i {
                let rj = row_start[j];
                let lo = first[i].max(first[j]);
                let mut s = values[ri + j - first[i]];
                for k in lo..j {
                    s -= values[ri + k - first[i]] * values[rj + k - first[j]];
                }
                let diag_j = values[rj + j - first[j]];
                values[ri + j - first[i]] = s / diag_j;
            }
            let mut d = values[ri + i - first[i]];
            for k in first[i]..i {
                let l = values[ri + k - first[i]];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(NotPositiveDefinite { row: perm[i], pivot: d });
            }
            values[ri + i - first[i]] = d.sqrt();
        }
        Ok(SkylineCholesky {
            perm,
            first,
            row_start,
            values,
        })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = b
        for i in 0..n {
            let ri = self.row_start[i];
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.values[ri + k - self.first[i]] * y[k];
            }
            y[i] = s / self.values[ri + i - self.first[i]];
        }
        // Lᵀ x = y, sweeping rows of L as columns of Lᵀ
        for i in (0..n).rev() {
            let ri = self.row_start[i];
            y[i] /= self.values[ri + i - self.first[i]];
            let xi = y[i];
            for k in self.first[i]..i {
                y[k] -= self.values[ri + k - self.first[i]] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Stored entries of the factor.
    pub(crate) fn envelope_size(&self) -> usize {
        self.values.len()
    }
}
