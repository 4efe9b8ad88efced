//! Profile (skyline) LDLᵀ factorization of a sparse symmetric matrix under a
//! bandwidth-reducing permutation.

use std::collections::VecDeque;

use crate::sparse::CsrMatrix;

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.iter().filter(|&&j| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).unwrap();
        let start = pseudo_peripheral(a, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&j| !visited[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Level structure from `root`: (eccentricity, last level).
fn bfs_levels(a: &CsrMatrix, root: usize) -> (usize, Vec<usize>) {
    let n = a.dim();
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut frontier = vec![root];
    let mut ecc = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &j in a.row(v).0 {
                if depth[j] == usize::MAX {
                    depth[j] = depth[v] + 1;
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            return (ecc, frontier);
        }
        ecc += 1;
        frontier = next;
    }
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = bfs_levels(a, root);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&j| (degree[j], j)).unwrap();
        let (e, l) = bfs_levels(a, cand);
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
        last = l;
    }
    root
}

/// Sum over rows of the distance from the first stored lower entry to the
/// diagonal, i.e. the number of off-diagonal factor entries.
pub fn profile_size(a: &CsrMatrix, perm: &[usize]) -> usize {
    let inv = inverse(perm);
    let mut total = 0;
    for (i, &old) in perm.iter().enumerate() {
        let first = a.row(old).0.iter().map(|&c| inv[c]).filter(|&j| j <= i).min().unwrap_or(i);
        total += i - first;
    }
    total
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

#[derive(Debug)]
pub struct SingularPivot {
    pub row: usize,
    pub pivot: f64,
}

/// `P A Pᵀ = L D Lᵀ` with `L` unit lower triangular in row-profile storage.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdl {
    /// Chooses the smaller profile of the natural and RCM orderings.
    pub fn choose_ordering(a: &CsrMatrix) -> (Vec<usize>, usize) {
        let natural: Vec<usize> = (0..a.dim()).collect();
        let p_nat = profile_size(a, &natural);
        let rcm = reverse_cuthill_mckee(a);
        let p_rcm = profile_size(a, &rcm);
        if p_rcm < p_nat {
            (rcm, p_rcm)
        } else {
            (natural, p_nat)
        }
    }

    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, SingularPivot> {
        let n = a.dim();
        let inv = inverse(&perm);
        let mut first = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for (i, &old) in perm.iter().enumerate() {
            first[i] = a.row(old).0.iter().map(|&c| inv[c]).filter(|&j| j <= i).min().unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i]);
        }
        let scale = (0..n)
            .flat_map(|i| a.row(i).1.iter().map(|v| v.abs()))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let mut g: Vec<f64> = Vec::new();
        for i in 0..n {
            let fi = first[i];
            let width = i - fi;
            g.clear();
            g.resize(width, 0.0);
            let mut aii = 0.0;
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j < i {
                    g[j - fi] += v;
                } else if j == i {
                    aii += v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                if lo < j {
                    let lj = &lower[start[j] + (lo - fj)..start[j] + (j - fj)];
                    let gi = &g[lo - fi..j - fi];
                    let s: f64 = gi.iter().zip(lj).map(|(x, y)| x * y).sum();
                    g[j - fi] -= s;
                }
            }
            let row = &mut lower[start[i]..start[i + 1]];
            let mut d = aii;
            for (k, (lij, gj)) in row.iter_mut().zip(&g).enumerate() {
                *lij = gj / diag[fi + k];
                d -= gj * *lij;
            }
            if !(d.abs() > 1e-12 * scale) {
                return Err(SingularPivot { row: i, pivot: d });
            }
            diag[i] = d;
        }
        Ok(Self { perm, first, start, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.lower.len() + self.diag.len()
    }

    /// Number of negative pivots, i.e. eigenvalues of `A` below zero.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi /= d;
        }
        for i in (0..n).rev() {
            let xi = y[i];
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}
