//! Small dense linear algebra on complex matrices: inverse, Hermitian
//! eigendecomposition and singular values.
//!
//! Hermitian problems go through the real symmetric embedding
//! `[[Re A, −Im A], [Im A, Re A]]`, which carries every eigenvalue twice and
//! maps matrix functions to matrix functions, so a real Jacobi solver
//! suffices.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::FockOperator;
use crate::scalar::{real, Real};

const MAX_SWEEPS: usize = 100;

/// Row-major real square matrix.
struct RealMatrix<T> {
    n: usize,
    a: Vec<T>,
}

impl<T: Real> RealMatrix<T> {
    fn embed(m: &FockOperator<T>) -> Self {
        let d = m.dim();
        let n = 2 * d;
        let mut a = vec![T::zero(); n * n];
        for i in 0..d {
            for j in 0..d {
                let z = m.get(i, j);
                a[i * n + j] = z.re;
                a[i * n + j + d] = -z.im;
                a[(i + d) * n + j] = z.im;
                a[(i + d) * n + j + d] = z.re;
            }
        }
        Self { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    fn unembed(&self) -> Result<FockOperator<T>> {
        let d = self.n / 2;
        FockOperator::from_fn(d, |i, j| Complex::new(self.at(i, j), self.at(i + d, j)))
    }
}

/// Cyclic Jacobi on a real symmetric matrix; returns eigenvalues and the
/// column eigenvector matrix.
fn symmetric_jacobi<T: Real>(mut m: RealMatrix<T>) -> Result<(Vec<T>, RealMatrix<T>)> {
    let n = m.n;
    let mut v = RealMatrix {
        n,
        a: vec![T::zero(); n * n],
    };
    for i in 0..n {
        v.a[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = m.at(i, j) * m.at(i, j);
                if i == j {
                    diag += x;
                } else {
                    off += x;
                }
            }
        }
        // rounding leaves off-diagonal mass of order n·ε·‖A‖
        let scale = T::from_index(n) * eps;
        if off <= scale * scale * (diag + off).max(T::min_positive_value()) {
            let evals = (0..n).map(|i| m.at(i, i)).collect();
            return Ok((evals, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m.at(p, q);
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                if apq.abs() <= eps * T::lit(0.5) * (app.abs() + aqq.abs()) * eps || apq == T::zero() {
                    continue;
                }
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.a[k * n + p];
                    let akq = m.a[k * n + q];
                    m.a[k * n + p] = c * akp - s * akq;
                    m.a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m.a[p * n + k];
                    let aqk = m.a[q * n + k];
                    m.a[p * n + k] = c * apk - s * aqk;
                    m.a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.a[k * n + p];
                    let vkq = v.a[k * n + q];
                    v.a[k * n + p] = c * vkp - s * vkq;
                    v.a[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Precision("Jacobi eigensolver did not converge".into()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub(crate) fn hermitian_eigenvalues<T: Real>(h: &FockOperator<T>) -> Result<Vec<T>> {
    let (mut evals, _) = symmetric_jacobi(RealMatrix::embed(h))?;
    evals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    // each eigenvalue appears twice in the embedding
    Ok(evals.into_iter().step_by(2).collect())
}

/// `g(H)` for Hermitian `H` through its spectral decomposition.
pub(crate) fn hermitian_function<T: Real>(h: &FockOperator<T>, g: impl Fn(T) -> T) -> Result<FockOperator<T>> {
    let (evals, v) = symmetric_jacobi(RealMatrix::embed(h))?;
    let n = v.n;
    let ge: Vec<T> = evals.iter().map(|&e| g(e)).collect();
    let mut out = RealMatrix {
        n,
        a: vec![T::zero(); n * n],
    };
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc += v.at(i, k) * ge[k] * v.at(j, k);
            }
            out.a[i * n + j] = acc;
        }
    }
    out.unembed()
}

/// Singular values in descending order (one-sided Jacobi on the embedding).
pub(crate) fn singular_values<T: Real>(m: &FockOperator<T>) -> Result<Vec<T>> {
    let mut a = RealMatrix::embed(m);
    let n = a.n;
    let eps = T::epsilon();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for k in 0..n {
                    let (x, y) = (a.at(k, p), a.at(k, q));
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let x = a.a[k * n + p];
                    let y = a.a[k * n + q];
                    a.a[k * n + p] = c * x - s * y;
                    a.a[k * n + q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Precision("one-sided Jacobi SVD did not converge".into()));
    }
    let mut sv: Vec<T> = (0..n)
        .map(|j| (0..n).map(|k| a.at(k, j) * a.at(k, j)).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    Ok(sv.into_iter().step_by(2).collect())
}

/// Gauss–Jordan inverse with partial pivoting.
pub(crate) fn inverse<T: Real>(m: &FockOperator<T>) -> Result<FockOperator<T>> {
    let n = m.dim();
    let mut a: Vec<Vec<Complex<T>>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut inv: Vec<Vec<Complex<T>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| real(if i == j { T::one() } else { T::zero() }))
                .collect()
        })
        .collect();
    let scale = m.max_abs();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().partial_cmp(&a[y][col].norm()).expect("finite entries"))
            .expect("non-empty range");
        if a[pivot][col].norm() <= T::epsilon() * scale {
            return Err(Error::Singular { ratio: 0.0 });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col].inv();
        for j in 0..n {
            a[col][j] *= d;
            inv[col][j] *= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for j in 0..n {
                let (ac, ic) = (a[col][j], inv[col][j]);
                a[r][j] -= f * ac;
                inv[r][j] -= f * ic;
            }
        }
    }
    FockOperator::from_rows(&inv)
}
