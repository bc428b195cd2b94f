//! K-deformed matrix product `a ·_K b = a K b`.
//!
//! The product is associative for any `K`, has the unit `K⁻¹` when `K` is
//! invertible, and for positive `K` the map `A ↦ √K A √K` carries it onto
//! the ordinary product.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::FockOperator;
use crate::linalg;
use crate::scalar::{real, Real};
use crate::tolerances;

/// Deformation matrix with its computed invertibility and positivity.
#[derive(Clone, Debug)]
pub struct KContext<T> {
    k: FockOperator<T>,
    invertible: bool,
    positive: bool,
    singular_ratio: T,
    /// Ascending eigenvalues when `K` is Hermitian.
    eigenvalues: Option<Vec<T>>,
    sqrt_k: Option<FockOperator<T>>,
    inverse: Option<FockOperator<T>>,
}

impl<T: Real> KContext<T> {
    pub fn new(k: FockOperator<T>) -> Result<Self> {
        let sv = linalg::singular_values(&k)?;
        let largest = sv[0];
        let smallest = *sv.last().expect("dim >= 2");
        let singular_ratio = if largest > T::zero() {
            smallest / largest
        } else {
            T::zero()
        };
        let invertible = singular_ratio > T::lit(tolerances::SINGULAR_RATIO);
        let inverse = if invertible { Some(linalg::inverse(&k)?) } else { None };

        let hermitian = k.is_hermitian(T::lit(tolerances::HERMITIAN));
        let eigenvalues = if hermitian {
            Some(linalg::hermitian_eigenvalues(&k)?)
        } else {
            None
        };
        let positive = eigenvalues
            .as_ref()
            .map(|ev| ev[0] > T::lit(tolerances::MIN_EIGENVALUE))
            .unwrap_or(false);
        let sqrt_k = if positive {
            Some(linalg::hermitian_function(&k, |e| e.sqrt())?)
        } else {
            None
        };
        Ok(Self {
            k,
            invertible,
            positive,
            singular_ratio,
            eigenvalues,
            sqrt_k,
            inverse,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(FockOperator::identity(dim)?)
    }

    pub fn k(&self) -> &FockOperator<T> {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn invertible(&self) -> bool {
        self.invertible
    }

    pub fn positive(&self) -> bool {
        self.positive
    }

    /// Smallest over largest singular value.
    pub fn singular_ratio(&self) -> T {
        self.singular_ratio
    }

    pub fn eigenvalues(&self) -> Option<&[T]> {
        self.eigenvalues.as_deref()
    }

    /// Unit of the K-product, `K⁻¹`.
    pub fn unit(&self) -> Result<&FockOperator<T>> {
        self.inverse.as_ref().ok_or(Error::Singular {
            ratio: self.singular_ratio.as_f64(),
        })
    }

    /// Principal Hermitian square root of `K`.
    pub fn sqrt(&self) -> Result<&FockOperator<T>> {
        self.sqrt_k.as_ref().ok_or_else(|| self.positivity_error())
    }

    fn positivity_error(&self) -> Error {
        match &self.eigenvalues {
            Some(ev) => {
                let (index, eigenvalue) = ev
                    .iter()
                    .enumerate()
                    .find(|(_, e)| **e <= T::lit(tolerances::MIN_EIGENVALUE))
                    .map(|(i, e)| (i, e.as_f64()))
                    .unwrap_or((0, ev[0].as_f64()));
                Error::NotPositive { index, eigenvalue }
            }
            None => Error::Validation(vec![format!(
                "K is not Hermitian (defect {:e})",
                self.k.hermiticity_defect().as_f64()
            )]),
        }
    }
}

/// `a · K · b`
pub fn k_multiply<T: Real>(a: &FockOperator<T>, b: &FockOperator<T>, ctx: &KContext<T>) -> Result<FockOperator<T>> {
    a.same_shape(ctx.k())?;
    b.same_shape(ctx.k())?;
    a.multiply(ctx.k())?.multiply(b)
}

/// Largest entry of `(a·_K b)·_K c − a·_K(b·_K c)`.
pub fn k_associativity_defect<T: Real>(
    a: &FockOperator<T>,
    b: &FockOperator<T>,
    c: &FockOperator<T>,
    ctx: &KContext<T>,
) -> Result<T> {
    let left = k_multiply(&k_multiply(a, b, ctx)?, c, ctx)?;
    let right = k_multiply(a, &k_multiply(b, c, ctx)?, ctx)?;
    left.max_abs_diff(&right)
}

/// `√K · a · √K`
pub fn sqrt_k_transport<T: Real>(a: &FockOperator<T>, ctx: &KContext<T>) -> Result<FockOperator<T>> {
    let s = ctx.sqrt()?;
    a.same_shape(s)?;
    s.multiply(a)?.multiply(s)
}

/// Two-point kernel sampled on a uniform 1-D grid, `values[i][j] = k(xᵢ, xⱼ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPointKernel<T> {
    pub nodes: Vec<T>,
    pub values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> TwoPointKernel<T> {
    pub fn new(nodes: Vec<T>, values: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return Err(Error::Grid("need at least two nodes".into()));
        }
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::shape(format!("{n} nodes"), "kernel samples"));
        }
        if values.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("kernel sample".into()));
        }
        Ok(Self { nodes, values })
    }

    /// Samples `f(x, y)` on `n` uniform nodes over `[lo, hi]`.
    pub fn sample(lo: T, hi: T, n: usize, f: impl Fn(T, T) -> Complex<T>) -> Result<Self> {
        // written to reject NaN bounds too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let ordered = lo < hi;
        if n < 2 || !ordered {
            return Err(Error::Grid("need lo < hi and at least two nodes".into()));
        }
        let h = (hi - lo) / T::from_index(n - 1);
        let nodes: Vec<T> = (0..n).map(|i| lo + h * T::from_index(i)).collect();
        let values = nodes
            .iter()
            .map(|&x| nodes.iter().map(|&y| f(x, y)).collect())
            .collect();
        Self::new(nodes, values)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trapezoidal weights of the nodes.
    pub fn weights(&self) -> Vec<T> {
        let n = self.len();
        let h = (self.nodes[n - 1] - self.nodes[0]) / T::from_index(n - 1);
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { h / T::lit(2.0) } else { h })
            .collect()
    }

    fn same_nodes(&self, other: &Self) -> Result<()> {
        if self.nodes != other.nodes {
            return Err(Error::shape(
                format!("{} nodes", self.len()),
                format!("{} different nodes", other.len()),
            ));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.same_nodes(other)?;
        let mut worst = T::zero();
        for (ra, rb) in self.values.iter().zip(&other.values) {
            for (a, b) in ra.iter().zip(rb) {
                worst = worst.max((*a - *b).norm());
            }
        }
        Ok(worst)
    }
}

/// `(a ·_K b)(x, x′) = ∬ a(x, y) K(y, z) b(z, x′) dy dz` by the trapezoidal
/// rule on the shared grid.
pub fn k_integral_product<T: Real>(
    a: &TwoPointKernel<T>,
    k: &TwoPointKernel<T>,
    b: &TwoPointKernel<T>,
) -> Result<TwoPointKernel<T>> {
    a.same_nodes(k)?;
    a.same_nodes(b)?;
    let n = a.len();
    let w = a.weights();
    // kb(y, x') = Σ_z K(y, z) w_z b(z, x')
    let mut kb = vec![vec![real(T::zero()); n]; n];
    for y in 0..n {
        for z in 0..n {
            let kyz = k.values[y][z] * w[z];
            for x2 in 0..n {
                kb[y][x2] += kyz * b.values[z][x2];
            }
        }
    }
    let mut out = vec![vec![real(T::zero()); n]; n];
    for x in 0..n {
        for y in 0..n {
            let axy = a.values[x][y] * w[y];
            for x2 in 0..n {
                out[x][x2] += axy * kb[y][x2];
            }
        }
    }
    TwoPointKernel::new(a.nodes.clone(), out)
}

/// Operators built from kernel samples with quadrature weights absorbed:
/// `A_ij = a(xᵢ, xⱼ) √(wᵢ wⱼ)`. With this scaling `k_integral_product`
/// is `A K B` rescaled back by `1/√(wᵢ wⱼ)`.
pub fn weighted_matrix<T: Real>(kernel: &TwoPointKernel<T>) -> Result<FockOperator<T>> {
    let w = kernel.weights();
    FockOperator::from_fn(kernel.len(), |i, j| kernel.values[i][j] * (w[i] * w[j]).sqrt())
}
