//! Reverse Cuthill-McKee ordering and envelope (skyline) Cholesky for the
//! sparse SPD subdomain and coarse matrices.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let neighbors = |i: usize| a.row(i).0.iter().copied().filter(move |&j| j != i);
    let degree: Vec<usize> = (0..n).map(|i| neighbors(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    // Level structure from `root`; returns (eccentricity, last level).
    let bfs_levels = |root: usize, seen: &mut Vec<usize>, stamp: usize| -> (usize, Vec<usize>) {
        let mut level = vec![root];
        seen[root] = stamp;
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &v in &level {
                for w in neighbors(v) {
                    if seen[w] != stamp {
                        seen[w] = stamp;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return (depth, level);
            }
            depth += 1;
            level = next;
        }
    };

    let mut seen = vec![usize::MAX; n];
    let mut stamp = 0;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        // Pseudo-peripheral root: repeatedly jump to a minimum-degree node of
        // the last level while the eccentricity grows.
        let mut root = start;
        let (mut ecc, mut last) = bfs_levels(root, &mut seen, stamp);
        stamp += 1;
        loop {
            let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            let (e, l) = bfs_levels(cand, &mut seen, stamp);
            stamp += 1;
            if e <= ecc {
                break;
            }
            root = cand;
            ecc = e;
            last = l;
        }
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbors(v).filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A P^T = L L^T` stored row-wise over the envelope.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    /// First stored column of each row of `L` (permuted numbering).
    first: Vec<usize>,
    /// Offset of `L[i, first[i]]` in `values`; row `i` ends at the diagonal.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a` (symmetric, only the lower triangle is read) after RCM
    /// reordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: perm.len() });
        }
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[i] = first[i].min(inv[j]);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (i, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let nj = inv[j];
                if nj <= i {
                    values[start[i] + nj - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = values[si + j - fi];
                for k in k0..j {
                    s -= values[si + k - fi] * values[sj + k - fj];
                }
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let mut d = values[si + i - fi];
            for k in fi..i {
                d -= values[si + k - fi] * values[si + k - fi];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            values[si + i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, start: start[..n].to_vec(), values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored entries of `L`.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[si + k - fi] * y[k];
            }
            y[i] = s / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.values[si + i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.values[si + k - fi] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
