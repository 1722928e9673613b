//! Small dense real matrices (dimension 2 or 4 in practice) and the few
//! factorizations the solvers need: Gaussian elimination, Jacobi symmetric
//! eigendecomposition (for null spaces of near-singular Jacobians),
//! Faddeev–LeVerrier characteristic polynomials, and Durand–Kerner roots.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::fmath;

/// Dense real square matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        Matrix {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Matrix {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "rows must form a square matrix");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| fmath::max(m, fmath::abs(*v)))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            a: self.a.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix::from_fn(self.n, |i, j| {
            (0..self.n).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot degenerates to zero.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut m = self.a.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            let mut best = fmath::abs(m[col * n + col]);
            for r in col + 1..n {
                let v = fmath::abs(m[r * n + col]);
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if piv != col {
                for c in 0..n {
                    m.swap(col * n + c, piv * n + c);
                }
                rhs.swap(col, piv);
            }
            let d = m[col * n + col];
            for r in col + 1..n {
                let f = m[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for c in col..n {
                    m[r * n + c] -= f * m[col * n + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                s -= m[i * n + j] * x[j];
            }
            x[i] = s / m[i * n + i];
            if !x[i].is_finite() {
                return None;
            }
        }
        Some(x)
    }

    /// Determinant via the characteristic polynomial's constant term.
    pub fn det(&self) -> f64 {
        let c = self.char_poly();
        let cn = c[self.n - 1];
        if self.n % 2 == 0 {
            cn
        } else {
            -cn
        }
    }

    /// Monic characteristic polynomial by the Faddeev–LeVerrier recurrence:
    /// returns `c` with `p(λ) = λⁿ + c[0] λⁿ⁻¹ + … + c[n−1]`.
    pub fn char_poly(&self) -> Vec<f64> {
        let n = self.n;
        let mut coeffs = Vec::with_capacity(n);
        let mut m = self.clone();
        coeffs.push(-m.trace());
        for k in 2..=n {
            let mut shifted = m.clone();
            let ck = coeffs[k - 2];
            for i in 0..n {
                shifted[(i, i)] += ck;
            }
            m = self.mul_mat(&shifted);
            coeffs.push(-m.trace() / k as f64);
        }
        coeffs
    }

    /// If every strictly lower (or strictly upper) entry is exactly zero,
    /// the eigenvalues can be read off the diagonal.
    pub fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        let lower_zero = (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == 0.0));
        let upper_zero = (0..self.n).all(|i| (i + 1..self.n).all(|j| self[(i, j)] == 0.0));
        if lower_zero || upper_zero {
            Some((0..self.n).map(|i| self[(i, i)]).collect())
        } else {
            None
        }
    }

    /// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns `(eigenvalues, v)` with columns of `v` the eigenvectors,
    /// sorted by ascending eigenvalue.
    pub fn jacobi_symmetric_eigen(&self) -> (Vec<f64>, Matrix) {
        let n = self.n;
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off <= 1e-30 * (1.0 + a.max_abs() * a.max_abs()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + fmath::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + fmath::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / fmath::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
        let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
        let vecs = Matrix::from_fn(n, |i, j| v[(i, order[j])]);
        (vals, vecs)
    }

    /// Singular values and the associated right/left singular directions,
    /// ascending. Built from Jacobi on `AᵀA` and `AAᵀ`; plenty for 2×2 and
    /// 4×4 rank tests.
    pub fn singular_triplets(&self) -> SingularTriplets {
        let (gram_vals, right) = self.transpose().mul_mat(self).jacobi_symmetric_eigen();
        let (_, left) = self.mul_mat(&self.transpose()).jacobi_symmetric_eigen();
        let sigma: Vec<f64> = gram_vals
            .iter()
            .map(|v| fmath::sqrt(fmath::max(*v, 0.0)))
            .collect();
        SingularTriplets {
            sigma,
            right,
            left,
        }
    }
}

/// Result of [`Matrix::singular_triplets`]: `sigma` ascending, with matching
/// columns of `right` (null directions first) and `left` computed from the
/// two Gram matrices independently.
pub struct SingularTriplets {
    pub sigma: Vec<f64>,
    pub right: Matrix,
    pub left: Matrix,
}

impl SingularTriplets {
    pub fn right_vector(&self, k: usize) -> Vec<f64> {
        (0..self.right.dim()).map(|i| self.right[(i, k)]).collect()
    }

    pub fn left_vector(&self, k: usize) -> Vec<f64> {
        (0..self.left.dim()).map(|i| self.left[(i, k)]).collect()
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Evaluates the monic polynomial `λⁿ + c[0]λⁿ⁻¹ + … + c[n−1]` at `z`.
pub fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for c in coeffs {
        acc = acc * z + c;
    }
    acc
}

fn poly_eval_deriv(coeffs: &[f64], z: Complex64) -> Complex64 {
    let n = coeffs.len();
    let mut acc = Complex64::new(n as f64, 0.0);
    for (k, c) in coeffs.iter().take(n - 1).enumerate() {
        let degree = (n - 1 - k) as f64;
        acc = acc * z + degree * c;
    }
    acc
}

/// All complex roots of the monic real polynomial `λⁿ + c[0]λⁿ⁻¹ + …`,
/// by Durand–Kerner simultaneous iteration with conjugate symmetrization,
/// cluster averaging for multiple roots, and a Newton polish on simple
/// roots. Roots are sorted by (real, imaginary) part.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let scale = coeffs
        .iter()
        .enumerate()
        .fold(0.0_f64, |m, (k, c)| {
            fmath::max(m, fmath::pow(fmath::abs(*c), 1.0 / (k + 1) as f64))
        });
    if scale == 0.0 {
        return vec![Complex64::new(0.0, 0.0); n];
    }

    // Durand–Kerner from the usual non-symmetric seed ring.
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * (scale * 1.5))
        .collect();
    for _ in 0..400 {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    let d = z[i] - z[j];
                    denom *= if d.norm() < 1e-300 {
                        Complex64::new(1e-12 * scale, 1e-12 * scale)
                    } else {
                        d
                    };
                }
            }
            let step = poly_eval(coeffs, z[i]) / denom;
            z[i] -= step;
            max_step = fmath::max(max_step, step.norm());
        }
        if max_step <= 1e-15 * scale {
            break;
        }
    }

    // Real polynomial: pair conjugates and symmetrize; roots with tiny
    // imaginary part collapse onto the real axis.
    let im_tol = 1e-9 * scale;
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if fmath::abs(z[i].im) <= im_tol {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || used[j] {
                continue;
            }
            let d = (z[j] - z[i].conj()).norm();
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d <= 1e-6 * scale {
                let re = 0.5 * (z[i].re + z[j].re);
                let im = 0.5 * (fmath::abs(z[i].im) + fmath::abs(z[j].im));
                let sign = if z[i].im >= 0.0 { 1.0 } else { -1.0 };
                z[i] = Complex64::new(re, sign * im);
                z[j] = Complex64::new(re, -sign * im);
                used[i] = true;
                used[j] = true;
                continue;
            }
        }
        used[i] = true;
    }

    // Cluster nearby roots (multiple eigenvalues) and replace each cluster
    // by its mean: the mean of a perturbed k-fold root is first-order
    // accurate while the individual roots are only O(ε^(1/k)).
    let cluster_tol = 1e-6 * scale;
    let mut assigned = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = clusters.len();
        for j in i + 1..n {
            if assigned[j] == usize::MAX && (z[j] - z[i]).norm() <= cluster_tol {
                assigned[j] = clusters.len();
                members.push(j);
            }
        }
        clusters.push(members);
    }
    for members in &clusters {
        if members.len() > 1 {
            let mean = members.iter().map(|&i| z[i]).sum::<Complex64>() / members.len() as f64;
            for &i in members {
                z[i] = mean;
            }
        } else {
            // Simple root: a short Newton polish.
            let i = members[0];
            for _ in 0..3 {
                let p = poly_eval(coeffs, z[i]);
                let dp = poly_eval_deriv(coeffs, z[i]);
                if dp.norm() <= 1e-300 {
                    break;
                }
                z[i] -= p / dp;
            }
            if fmath::abs(z[i].im) <= im_tol {
                z[i].im = 0.0;
            }
        }
    }

    z.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    z
}

/// Solves the complex system `a x = b` (row-major `n×n`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_complex(a: &[Complex64], b: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].norm();
        for r in col + 1..n {
            let v = m[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let sub = f * m[col * n + c];
                m[r * n + c] -= sub;
            }
            let sub = f * rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_solve_roundtrip() {
        let a = Matrix::from_rows(&[&[2.0, 1.0, -1.0], &[-3.0, -1.0, 2.0], &[-2.0, 1.0, 2.0]]);
        let x = a.solve(&[8.0, -11.0, -3.0]).unwrap();
        let expect = [2.0, 3.0, -1.0];
        for (xi, ei) in x.iter().zip(expect) {
            assert!((xi - ei).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_solve_returns_none() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.solve(&[1.0, 2.0]).is_none());
    }

    #[test]
    fn char_poly_of_identity() {
        let c = Matrix::identity(4).char_poly();
        // (λ - 1)^4 = λ⁴ - 4λ³ + 6λ² - 4λ + 1
        let expect = [-4.0, 6.0, -4.0, 1.0];
        for (ci, ei) in c.iter().zip(expect) {
            assert!((ci - ei).abs() < 1e-12);
        }
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!((a.det() - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn durand_kerner_on_distinct_real_roots() {
        // (λ-1)(λ-2)(λ-3)(λ-4) = λ⁴ -10λ³ +35λ² -50λ +24
        let roots = poly_roots(&[-10.0, 35.0, -50.0, 24.0]);
        let expect = [1.0, 2.0, 3.0, 4.0];
        for (r, e) in roots.iter().zip(expect) {
            assert!((r.re - e).abs() < 1e-10 && r.im == 0.0, "{roots:?}");
        }
    }

    #[test]
    fn durand_kerner_complex_pair() {
        // (λ² + 1)(λ² - 1) = λ⁴ - 1
        let roots = poly_roots(&[0.0, 0.0, 0.0, -1.0]);
        assert!((roots[0].re + 1.0).abs() < 1e-10);
        assert!((roots[3].re - 1.0).abs() < 1e-10);
        assert!((roots[1].im + 1.0).abs() < 1e-10);
        assert!((roots[2].im - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_polynomial_roots_are_zero() {
        let roots = poly_roots(&[0.0, 0.0, 0.0, 0.0]);
        for r in roots {
            assert_eq!(r, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn jacobi_symmetric_small() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (vals, vecs) = a.jacobi_symmetric_eigen();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        for k in 0..2 {
            let v: Vec<f64> = (0..2).map(|i| vecs[(i, k)]).collect();
            let av = a.mul_vec(&v);
            for i in 0..2 {
                assert!((av[i] - vals[k] * v[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn triangular_detection() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[5.0, 2.0]]);
        assert_eq!(a.triangular_diagonal(), Some(vec![1.0, 2.0]));
        let b = Matrix::from_rows(&[&[1.0, 3.0], &[5.0, 2.0]]);
        assert_eq!(b.triangular_diagonal(), None);
    }
}
