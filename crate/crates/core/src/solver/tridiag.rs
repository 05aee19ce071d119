//! Eigenpairs of `a·(2I − S) + diag(v)`, the three-point Laplacian plus a
//! potential, where `S` is the nearest-neighbour shift.
//!
//! The diagonal `2a + v_i` is never formed: for fine grids `a` reaches 1e10 and
//! adding `v_i` to it would throw away the digits the low eigenvalues live in.
//! The LDLᵀ pivots are carried as `r_i = q_i − a`, which obeys
//!
//! ```text
//! r_0 = a + v_0 − λ,   r_i = v_i − λ + a·r_{i−1} / (a + r_{i−1})
//! ```
//!
//! without cancellation.

pub(crate) struct LaplacianPlusDiagonal<'a> {
    a: f64,
    v: &'a [f64],
}

impl<'a> LaplacianPlusDiagonal<'a> {
    pub(crate) fn new(a: f64, v: &'a [f64]) -> Self {
        assert!(a > 0.0 && !v.is_empty());
        LaplacianPlusDiagonal { a, v }
    }

    fn guard(&self, q: f64) -> f64 {
        if q == 0.0 {
            -f64::EPSILON * self.a
        } else {
            q
        }
    }

    /// Number of eigenvalues strictly below `lambda` (Sylvester inertia).
    pub(crate) fn count_below(&self, lambda: f64) -> usize {
        let a = self.a;
        let mut count = 0;
        let mut r = a + self.v[0] - lambda;
        let mut q = self.guard(a + r);
        if q < 0.0 {
            count += 1;
        }
        for &vi in &self.v[1..] {
            r = vi - lambda + a * r / q;
            q = self.guard(a + r);
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection, starting from a
    /// known lower bound.
    fn eigenvalue_above(&self, k: usize, mut lo: f64) -> f64 {
        let mut hi = self.v.iter().cloned().fold(f64::MIN, f64::max) + 4.0 * self.a + 1.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `k` eigenvalues in ascending order.
    pub(crate) fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        // The Laplacian part is positive semidefinite, so min(v) bounds from below.
        let lo = self.v.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
        (0..k).map(|j| self.eigenvalue_above(j, lo)).collect()
    }

    /// Solves `(T − σ) x = b` in place.
    fn shifted_solve(&self, sigma: f64, x: &mut [f64]) {
        let a = self.a;
        let n = self.v.len();
        let mut q = vec![0.0; n];
        let mut r = a + self.v[0] - sigma;
        q[0] = self.guard(a + r);
        for i in 1..n {
            r = self.v[i] - sigma + a * r / q[i - 1];
            q[i] = self.guard(a + r);
        }
        // L has sub-diagonal l_i = -a / q_i
        for i in 1..n {
            x[i] += a / q[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= q[i];
        }
        for i in (0..n - 1).rev() {
            x[i] += a / q[i] * x[i + 1];
        }
    }

    /// Eigenvector for eigenvalue `lambda` by inverse iteration, orthogonalised
    /// against `previous` (unit vectors in the plain dot product).
    pub(crate) fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.v.len();
        // deterministic, symmetry-free start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
                0.5 + (t - t.floor())
            })
            .collect();
        for _ in 0..4 {
            orthogonalize(&mut x, previous);
            normalize(&mut x);
            self.shifted_solve(lambda, &mut x);
            orthogonalize(&mut x, previous);
            normalize(&mut x);
        }
        x
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b).map(|(p, q)| p * q).sum();
        x.iter_mut().zip(b).for_each(|(p, q)| *p -= dot * q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_laplacian_spectrum() {
        // a(2 − 2cos(kπ/(n+1))), k = 1..n
        let n = 50;
        let v = vec![0.0; n];
        let t = LaplacianPlusDiagonal::new(3.0, &v);
        let ev = t.lowest_eigenvalues(5);
        for (j, e) in ev.iter().enumerate() {
            let k = (j + 1) as f64;
            let exact = 3.0 * (2.0 - 2.0 * (k * std::f64::consts::PI / (n as f64 + 1.0)).cos());
            assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
        }
    }

    #[test]
    fn count_matches_dense_reference() {
        // 3x3: a = 1, v = (0, 1, 3) -> matrix [[2,-1,0],[-1,3,-1],[0,-1,5]]
        let v = [0.0, 1.0, 3.0];
        let t = LaplacianPlusDiagonal::new(1.0, &v);
        let ev = t.lowest_eigenvalues(3);
        let m = nalgebra::Matrix3::new(2.0, -1.0, 0.0, -1.0, 3.0, -1.0, 0.0, -1.0, 5.0);
        let mut reference: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(t.count_below(reference[1] + 1e-9), 2);
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let n = 200;
        let v: Vec<f64> = (0..n).map(|i| ((i as f64) / 20.0 - 5.0).powi(2)).collect();
        let t = LaplacianPlusDiagonal::new(100.0, &v);
        let ev = t.lowest_eigenvalues(3);
        let mut vecs: Vec<Vec<f64>> = Vec::new();
        for &l in &ev {
            let x = t.eigenvector(l, &vecs);
            vecs.push(x);
        }
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
    }
}
