//! Direct linear solvers sized for desk-scale meshes.
//!
//! The Newton systems assembled from P1 elements are symmetric and, for
//! non-decreasing f, positive definite. After reverse Cuthill–McKee
//! ordering their bandwidth is O(√N), so a banded LDLᵀ factorization is a
//! direct sparse solve at N·b² cost with fully deterministic results.

use crate::error::{Error, Result};

/// Symmetric banded matrix stored by diagonals: `band[d][i]` holds
/// A[i, i−d] for d = 0..=bw.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    pub n: usize,
    pub bw: usize,
    band: Vec<Vec<f64>>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBandMatrix {
            n,
            bw,
            band: (0..=bw).map(|_| vec![0.0; n]).collect(),
        }
    }

    /// Add `v` to A[i, j] (and implicitly A[j, i]); requires |i−j| ≤ bw.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        debug_assert!(d <= self.bw, "entry ({i},{j}) outside bandwidth {}", self.bw);
        self.band[d][hi] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bw {
            0.0
        } else {
            self.band[d][hi]
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[0][i] * x[i];
            let dmax = self.bw.min(i);
            for d in 1..=dmax {
                let j = i - d;
                let v = self.band[d][i];
                y[i] += v * x[j];
                y[j] += v * x[i];
            }
        }
        y
    }

    /// In-place LDLᵀ factorization. Fails on vanishing pivots.
    pub fn factor_ldlt(mut self) -> Result<BandLdlt> {
        let n = self.n;
        let bw = self.bw;
        let mut scale = 0.0f64;
        for i in 0..n {
            scale = scale.max(self.band[0][i].abs());
        }
        let pivot_floor = 1e-14 * scale.max(1e-300);
        for j in 0..n {
            // d_j = a_jj − Σ_k L_jk² d_k
            let kmin = j.saturating_sub(bw);
            let mut d = self.band[0][j];
            for k in kmin..j {
                let l = self.band[j - k][j];
                d -= l * l * self.band[0][k];
            }
            if !d.is_finite() || d.abs() <= pivot_floor {
                return Err(Error::JacobianSingular { row: j, pivot: d });
            }
            self.band[0][j] = d;
            // column j of L below the diagonal
            let imax = (j + bw).min(n - 1);
            for i in j + 1..=imax {
                let kmin = i.saturating_sub(bw).max(kmin);
                let mut v = self.band[i - j][i];
                for k in kmin..j {
                    v -= self.band[i - k][i] * self.band[j - k][j] * self.band[0][k];
                }
                self.band[i - j][i] = v / d;
            }
        }
        Ok(BandLdlt { m: self })
    }
}

/// Factored form: unit lower triangle L in the band, D on the diagonal.
#[derive(Debug, Clone)]
pub struct BandLdlt {
    m: SymBandMatrix,
}

impl BandLdlt {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.m.n;
        let bw = self.m.bw;
        let mut x = b.to_vec();
        // L z = b
        for i in 0..n {
            let kmin = i.saturating_sub(bw);
            let mut v = x[i];
            for k in kmin..i {
                v -= self.m.band[i - k][i] * x[k];
            }
            x[i] = v;
        }
        // D y = z
        for i in 0..n {
            x[i] /= self.m.band[0][i];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let imax = (i + bw).min(n - 1);
            let mut v = x[i];
            for k in i + 1..=imax {
                v -= self.m.band[k - i][k] * x[k];
            }
            x[i] = v;
        }
        x
    }
}

/// Reverse Cuthill–McKee ordering of an undirected graph given as an
/// adjacency list. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    // process components from the globally minimal-degree unvisited node
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.sort_by_key(|&v| (adj[v].len(), v));
    for &seed in &nodes {
        if visited[seed] {
            continue;
        }
        // a BFS pass from the seed finds a pseudo-peripheral start
        let start = bfs_far_node(adj, seed);
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nb.sort_by_key(|&u| (adj[u].len(), u));
            for u in nb {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_far_node(adj: &[Vec<usize>], start: usize) -> usize {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[start] = 0;
    queue.push_back(start);
    let mut far = start;
    while let Some(v) = queue.pop_front() {
        if dist[v] > dist[far] || (dist[v] == dist[far] && adj[v].len() < adj[far].len()) {
            far = v;
        }
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    far
}

/// Solve a symmetric cyclic tridiagonal system by Sherman–Morrison over
/// the Thomas algorithm. `diag[i]` couples to `off[i]` between rows i and
/// i+1 (cyclically: `off[n−1]` couples rows n−1 and 0).
pub fn solve_cyclic_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 3 && off.len() == n && rhs.len() == n);
    let corner = off[n - 1];
    let gamma = -diag[0];
    // modified system without the cyclic corner
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= corner * corner / gamma;
    let y = thomas(&d, &off[..n - 1], rhs)?;
    // correction vector u = (γ, 0, …, 0, corner)ᵀ
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner;
    let z = thomas(&d, &off[..n - 1], &u)?;
    // v = (1, 0, …, 0, corner/γ)
    let vy = y[0] + corner / gamma * y[n - 1];
    let vz = z[0] + corner / gamma * z[n - 1];
    let denom = 1.0 + vz;
    if denom.abs() < 1e-300 {
        return Err(Error::JacobianSingular {
            row: 0,
            pivot: denom,
        });
    }
    let factor = vy / denom;
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect())
}

/// Symmetric tridiagonal Thomas solve; `off` has length n−1.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut x = rhs.to_vec();
    for i in 1..n {
        if d[i - 1].abs() < 1e-300 {
            return Err(Error::JacobianSingular {
                row: i - 1,
                pivot: d[i - 1],
            });
        }
        let w = off[i - 1] / d[i - 1];
        d[i] -= w * off[i - 1];
        x[i] -= w * x[i - 1];
    }
    x[n - 1] /= d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (x[i] - off[i] * x[i + 1]) / d[i];
    }
    Ok(x)
}
