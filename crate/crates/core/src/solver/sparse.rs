//! Symmetric sparse matrices on the free (interior) nodes of a mesh and a Jacobi-preconditioned
//! conjugate gradient solver.

use super::mesh::Mesh;

/// Compressed sparse rows over the free unknowns, with a per-triangle scatter map so that
/// repeated assemblies (one per Newton step) reuse the pattern.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Numbering of free nodes plus the scatter positions of every local 3×3 element block.
#[derive(Debug, Clone)]
pub struct Pattern {
    /// `free[i]` is the unknown index of node `i`, or `None` on the boundary.
    pub free: Vec<Option<usize>>,
    pub n: usize,
    /// For triangle `k` and local pair `(a, b)`, the CSR slot at `9k + 3a + b`, or `usize::MAX`.
    pub slots: Vec<usize>,
    pub matrix: CsrMatrix,
}

impl Pattern {
    pub fn new(mesh: &Mesh) -> Self {
        let mut free = vec![None; mesh.nodes.len()];
        let mut n = 0;
        for (i, &b) in mesh.boundary.iter().enumerate() {
            if !b {
                free[i] = Some(n);
                n += 1;
            }
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for t in &mesh.triangles {
            for &a in t {
                if let Some(ia) = free[a] {
                    for &b in t {
                        if let Some(ib) = free[b] {
                            rows[ia].push(ib);
                        }
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let mut slots = vec![usize::MAX; 9 * mesh.triangles.len()];
        for (k, t) in mesh.triangles.iter().enumerate() {
            for a in 0..3 {
                let Some(ia) = free[t[a]] else { continue };
                for b in 0..3 {
                    let Some(ib) = free[t[b]] else { continue };
                    let row = &cols[row_ptr[ia]..row_ptr[ia + 1]];
                    let off = row.binary_search(&ib).expect("pattern contains every element pair");
                    slots[9 * k + 3 * a + b] = row_ptr[ia] + off;
                }
            }
        }
        let nnz = cols.len();
        Pattern {
            free,
            n,
            slots,
            matrix: CsrMatrix { n, row_ptr, cols, vals: vec![0.0; nnz] },
        }
    }

    /// Adds a local element matrix for triangle `k`.
    #[inline]
    pub fn add_local(&mut self, k: usize, local: &[[f64; 3]; 3]) {
        for a in 0..3 {
            for b in 0..3 {
                let s = self.slots[9 * k + 3 * a + b];
                if s != usize::MAX {
                    self.matrix.vals[s] += local[a][b];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from the given `x`,
/// until `‖r‖ ≤ tol·‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgOutcome {
    let n = a.n;
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt();
    let target = tol * bnorm.max(f64::MIN_POSITIVE);
    let mut res = dot(&r, &r).sqrt();
    if res <= target {
        return CgOutcome { iterations: 0, residual: res, converged: true };
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return CgOutcome { iterations: it, residual: res, converged: false };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= target {
            return CgOutcome { iterations: it, residual: res, converged: true };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome { iterations: max_iter, residual: res, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcg_solves_tridiagonal_system() {
        // 1-D Laplacian, n = 50
        let n = 50;
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            if i > 0 {
                cols.push(i - 1);
                vals.push(-1.0);
            }
            cols.push(i);
            vals.push(2.0);
            if i + 1 < n {
                cols.push(i + 1);
                vals.push(-1.0);
            }
            row_ptr.push(cols.len());
        }
        let a = CsrMatrix { n, row_ptr, cols, vals };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = pcg(&a, &b, &mut x, 1e-12, 1000);
        assert!(out.converged);
        // exact solution x_i = (i+1)(n-i)/2
        for (i, xi) in x.iter().enumerate() {
            let exact = (i + 1) as f64 * (n - i) as f64 / 2.0;
            assert!((xi - exact).abs() < 1e-8 * exact);
        }
    }
}
