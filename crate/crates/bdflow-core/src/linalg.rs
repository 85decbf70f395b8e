//! Small dense linear algebra used by the implicit solvers and the
//! definiteness checks: vector helpers, symmetric matrices, Cholesky and
//! partially pivoted LU solves, and cyclic Jacobi eigenvalues.
//!
//! Everything here targets the modest sizes this crate works at (step
//! equations on a few dozen unknowns, 2x2 and 3x3 form matrices), so plain
//! dense storage is used throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Euclidean inner product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    math::sqrt(dot(x, x))
}

/// `x - y` as a new vector.
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `x += alpha * y` in place.
pub fn axpy(x: &mut [f64], alpha: f64, y: &[f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (xi, yi) in x.iter_mut().zip(y) {
        *xi += alpha * yi;
    }
}

/// Dense symmetric matrix in full row-major storage.
///
/// Only the API keeps it symmetric: constructors mirror entries, so callers
/// never have to remember which triangle is authoritative.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from an entry function; `f` is consulted for `i <= j` and
    /// mirrored to the lower triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Adds `v` to `(i, j)` and, when `i != j`, to `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    /// Adds `alpha` to every diagonal entry.
    pub fn shift_diagonal(&mut self, alpha: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += alpha;
        }
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = dot(row, x);
        }
        y
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
    ///
    /// Returns `None` when a pivot drops below `1e-14` times the largest
    /// diagonal entry, i.e. when `A` is not numerically positive definite.
    pub fn cholesky_solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut l = self.data.clone();
        let scale = (0..n).map(|i| self.get(i, i)).fold(0.0_f64, f64::max);
        let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= floor {
                return None;
            }
            let d = math::sqrt(d);
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut v = l[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / d;
            }
        }
        // forward then backward substitution on L L^T x = b
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= l[i * n + k] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= l[k * n + i] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        Some(x)
    }

    fn jacobi(&self, mut vectors: Option<&mut Vec<f64>>) -> Vec<f64> {
        let n = self.n;
        let mut a = self.data.clone();
        let tol = 1e-15 * self.frobenius().max(f64::MIN_POSITIVE);
        for _sweep in 0..60 {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * a[i * n + j] * a[i * n + j];
                }
            }
            if math::sqrt(off) <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    // stable tangent of the rotation angle
                    let t = theta.signum() / (theta.abs() + math::hypot(theta, 1.0));
                    let c = 1.0 / math::hypot(t, 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    if let Some(v) = vectors.as_deref_mut() {
                        for k in 0..n {
                            let vkp = v[k * n + p];
                            let vkq = v[k * n + q];
                            v[k * n + p] = c * vkp - s * vkq;
                            v[k * n + q] = s * vkp + c * vkq;
                        }
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    /// Eigenvalues in ascending order, by the cyclic Jacobi method.
    ///
    /// Deterministic and accurate to near machine precision for the small
    /// matrices used here; the iteration stops once the off-diagonal mass
    /// falls below `1e-15` times the Frobenius norm (or after 60 sweeps).
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n == 0 {
            return Vec::new();
        }
        let mut eig = self.jacobi(None);
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        eig
    }

    /// Smallest eigenvalue (`NaN` for an empty matrix).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::NAN)
    }

    /// Full spectral decomposition `A = V diag(values) V^T` with orthonormal
    /// columns, eigenvalues ascending.
    pub fn eigen_decomposition(&self) -> EigenDecomposition {
        let n = self.n;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        let diag = self.jacobi(Some(&mut v));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite"));
        let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
        let vectors: Vec<Vec<f64>> = order
            .iter()
            .map(|&m| (0..n).map(|k| v[k * n + m]).collect())
            .collect();
        EigenDecomposition { values, vectors }
    }
}

/// Result of [`SymMatrix::eigen_decomposition`]: `values[m]` goes with the
/// unit eigenvector `vectors[m]`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Solves a general dense `A x = b` by LU with partial pivoting.
///
/// `a` is row-major `n x n` and is consumed as workspace. Returns `None` when
/// a pivot is smaller than `1e-14` times the largest row magnitude.
pub fn lu_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= floor {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let m = a[r * n + col] / d;
            if m == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for k in (col + 1)..n {
                a[r * n + k] -= m * a[col * n + k];
            }
            b[r] -= m * b[col];
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Some(b)
}
