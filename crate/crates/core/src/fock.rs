//! Truncated Fock-space operators.
//!
//! An operator is a dense `dim × dim` complex matrix in the number basis,
//! entry `(m, n)` being `⟨m|A|n⟩`. Displacement operators are filled from
//! their closed-form Laguerre matrix elements rather than by exponentiating
//! the truncated generator, so every stored entry is correct to rounding and
//! truncation only shows up through products.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, is_finite_c, ln_factorials, pairwise_sum, phase, real, Real};
use crate::tolerances;

/// Smallest truncation dimension accepted anywhere.
pub const MIN_DIM: usize = 2;

/// Truncation used for kernel evaluations.
pub const DEFAULT_KERNEL_DIM: usize = 128;

/// Truncation used for symbol and Wigner-function work.
pub const DEFAULT_SYMBOL_DIM: usize = 64;

fn check_dim(dim: usize) -> Result<()> {
    if dim < MIN_DIM {
        return Err(Error::InvalidDimension { dim, min: MIN_DIM });
    }
    Ok(())
}

/// Dense operator in a truncated number basis.
#[derive(Clone, PartialEq)]
pub struct FockOperator<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: fmt::Debug> fmt::Debug for FockOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FockOperator(dim = {})", self.dim)?;
        let shown = self.dim.min(6);
        for m in 0..shown {
            for n in 0..shown {
                let z = &self.entries[m * self.dim + n];
                write!(f, " {:>10.4?}{:+.4?}i", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.dim > shown { " ..." } else { "" })?;
        }
        Ok(())
    }
}

impl<T: Real> FockOperator<T> {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_real_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Result<Self> {
        let mut op = Self::zeros(diag.len())?;
        for (n, d) in diag.iter().enumerate() {
            op.set(n, n, *d);
        }
        op.check_finite()?;
        Ok(op)
    }

    pub fn from_real_diagonal(diag: &[T]) -> Result<Self> {
        let diag: Vec<_> = diag.iter().map(|&d| real(d)).collect();
        Self::from_diagonal(&diag)
    }

    /// Builds an operator entry by entry from `f(m, n)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        check_dim(dim)?;
        let mut entries = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            for n in 0..dim {
                entries.push(f(m, n));
            }
        }
        let op = Self { dim, entries };
        op.check_finite()?;
        Ok(op)
    }

    /// Row-major construction; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::shape(format!("{dim} rows"), format!("row of {}", bad.len())));
        }
        Self::from_fn(dim, |m, n| rows[m][n])
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(k) = self.entries.iter().position(|z| !is_finite_c(*z)) {
            return Err(Error::NonFinite(format!(
                "operator entry ({}, {})",
                k / self.dim,
                k % self.dim
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.entries[m * self.dim + n]
    }

    #[inline]
    pub(crate) fn set(&mut self, m: usize, n: usize, z: Complex<T>) {
        self.entries[m * self.dim + n] = z;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn row(&self, m: usize) -> &[Complex<T>] {
        &self.entries[m * self.dim..(m + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.dim).map(|n| self.get(n, n)).collect()
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::shape(
                format!("{0}x{0}", self.dim),
                format!("{0}x{0}", other.dim),
            ));
        }
        Ok(())
    }

    /// Ordinary matrix product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let n = self.dim;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &other.entries[k * n..(k + 1) * n];
                for (r, b) in row.iter_mut().zip(brow) {
                    *r += a * *b;
                }
            }
        }
        Ok(Self { dim: n, entries: out })
    }

    /// Diagonal of `self · other` without forming the product.
    pub fn product_diagonal(&self, other: &Self) -> Result<Vec<Complex<T>>> {
        self.same_shape(other)?;
        let n = self.dim;
        Ok((0..n)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc += self.entries[i * n + k] * other.entries[k * n + i];
                }
                acc
            })
            .collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = Vec::with_capacity(n * n);
        for m in 0..n {
            for k in 0..n {
                entries.push(self.entries[k * n + m].conj());
            }
        }
        Self { dim: n, entries }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(real(s))
    }

    /// `D · self` for a diagonal `D`.
    pub fn left_diagonal(&self, diag: &[Complex<T>]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::shape(self.dim, format!("diagonal of {}", diag.len())));
        }
        let n = self.dim;
        let mut out = self.clone();
        for (m, d) in diag.iter().enumerate() {
            for z in &mut out.entries[m * n..(m + 1) * n] {
                *z *= *d;
            }
        }
        Ok(out)
    }

    /// `self · D` for a diagonal `D`.
    pub fn right_diagonal(&self, diag: &[Complex<T>]) -> Result<Self> {
        if diag.len() != self.dim {
            return Err(Error::shape(self.dim, format!("diagonal of {}", diag.len())));
        }
        let n = self.dim;
        let mut out = self.clone();
        for m in 0..n {
            for (z, d) in out.entries[m * n..(m + 1) * n].iter_mut().zip(diag) {
                *z *= *d;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Plain (undamped) trace.
    pub fn trace(&self) -> Complex<T> {
        (0..self.dim)
            .map(|n| self.get(n, n))
            .fold(real(T::zero()), |a, b| a + b)
    }

    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Largest `|A − A†|` entry.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for m in 0..n {
            for k in m..n {
                worst = worst.max((self.get(m, k) - self.get(k, m).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Top-left `n × n` block.
    pub fn leading_block(&self, n: usize) -> Result<Self> {
        if n > self.dim {
            return Err(Error::shape(self.dim, format!("block of {n}")));
        }
        Self::from_fn(n, |i, j| self.get(i, j))
    }

    /// Largest entry magnitude on rows or columns at or above `level`.
    pub fn weight_above(&self, level: usize) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for m in 0..n {
            for k in 0..n {
                if m >= level || k >= level {
                    worst = worst.max(self.get(m, k).norm());
                }
            }
        }
        worst
    }

    /// `|n⟩⟨n|`
    pub fn number_projector(level: usize, dim: usize) -> Result<Self> {
        if level >= dim {
            return Err(Error::shape(dim, format!("level {level}")));
        }
        let mut op = Self::zeros(dim)?;
        op.set(level, level, real(T::one()));
        Ok(op)
    }

    /// `|ψ⟩⟨ψ|` for the truncated amplitude vector `psi`.
    pub fn ket_bra(psi: &[Complex<T>]) -> Result<Self> {
        Self::from_fn(psi.len(), |m, n| psi[m] * psi[n].conj())
    }

    /// Projector on the coherent state `|β⟩ = T(β)|0⟩`, truncated.
    pub fn coherent_projector(beta: Complex<T>, dim: usize) -> Result<Self> {
        Self::ket_bra(&coherent_amplitudes(beta, dim)?)
    }
}

/// Amplitudes `⟨n|β⟩ = e^{−|β|²/2} βⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes<T: Real>(beta: Complex<T>, dim: usize) -> Result<Vec<Complex<T>>> {
    check_dim(dim)?;
    if !is_finite_c(beta) {
        return Err(Error::NonFinite("coherent amplitude".into()));
    }
    let mut out = Vec::with_capacity(dim);
    let mut amp = real((-beta.norm_sqr() / T::lit(2.0)).exp());
    for n in 0..dim {
        if n > 0 {
            amp = amp * beta / T::from_index(n).sqrt();
        }
        out.push(amp);
    }
    Ok(out)
}

/// Annihilation operator `a`: entry `(n−1, n) = √n`.
pub fn annihilator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    let mut op = FockOperator::zeros(dim)?;
    for n in 1..dim {
        op.set(n - 1, n, real(T::from_index(n).sqrt()));
    }
    Ok(op)
}

/// Creation operator `a†`.
pub fn creator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    Ok(annihilator(dim)?.adjoint())
}

/// `a†a = diag(0, 1, ..., dim−1)`
pub fn number_operator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    check_dim(dim)?;
    FockOperator::from_real_diagonal(&(0..dim).map(T::from_index).collect::<Vec<_>>())
}

pub fn parity_diagonal<T: Real>(dim: usize) -> Vec<Complex<T>> {
    (0..dim)
        .map(|n| real(if n % 2 == 0 { T::one() } else { -T::one() }))
        .collect()
}

/// Parity `e^{iπa†a} = diag((−1)ⁿ)`.
pub fn parity_operator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    check_dim(dim)?;
    FockOperator::from_diagonal(&parity_diagonal(dim))
}

/// Position quadrature `(a + a†)/√2`.
pub fn position_operator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    let a = annihilator::<T>(dim)?;
    Ok(a.add(&a.adjoint())?.scale_real(T::FRAC_1_SQRT_2()))
}

/// Momentum quadrature `(a − a†)/(i√2)`.
pub fn momentum_operator<T: Real>(dim: usize) -> Result<FockOperator<T>> {
    let a = annihilator::<T>(dim)?;
    Ok(a.sub(&a.adjoint())?.scale(cplx(T::zero(), -T::FRAC_1_SQRT_2())))
}

/// Displacement operator `T(α) = exp(αa† − α*a)`.
///
/// For `m = n + k ≥ n` the elements are
/// `√(n!/m!) αᵏ e^{−|α|²/2} L_n^{(k)}(|α|²)`, and `⟨n|T|m⟩` follows from
/// `T(α)† = T(−α)`. The Laguerre factor is carried through a rescaled
/// three-term recurrence of `g_n = √(n! k!/(n+k)!) L_n^{(k)}` and the
/// remaining prefactor `x^{k/2} e^{−x/2}/√k!` is combined in log form, so
/// no factorial is ever formed.
pub fn displacement<T: Real>(alpha: Complex<T>, dim: usize) -> Result<FockOperator<T>> {
    check_dim(dim)?;
    if !is_finite_c(alpha) {
        return Err(Error::NonFinite(format!("displacement amplitude {alpha:?}")));
    }
    let x = alpha.norm_sqr();
    if x == T::zero() {
        return FockOperator::identity(dim);
    }
    let half = T::lit(0.5);
    let ln_x = x.ln();
    let theta = alpha.im.atan2(alpha.re);
    let ln_fact = ln_factorials::<T>(dim);
    // rescale the recurrence whenever it leaves [1/BIG, BIG]
    let big = T::lit(1e30);
    let ln_big = big.ln();

    let mut op = FockOperator::zeros(dim)?;
    let mut g = vec![T::zero(); dim];
    let mut log_scale = vec![T::zero(); dim];
    for k in 0..dim {
        let kf = T::from_index(k);
        let log_pref = half * kf * ln_x - half * x - half * ln_fact[k];
        let len = dim - k;
        g[0] = T::one();
        log_scale[0] = T::zero();
        if len > 1 {
            g[1] = (T::one() + kf - x) / (kf + T::one()).sqrt();
            log_scale[1] = T::zero();
        }
        let mut scale = T::zero();
        for n in 1..len.saturating_sub(1) {
            let nf = T::from_index(n);
            let next = ((T::lit(2.0) * nf + T::one() + kf - x) * g[n] - (nf * (nf + kf)).sqrt() * g[n - 1])
                / ((nf + T::one()) * (nf + T::one() + kf)).sqrt();
            g[n + 1] = next;
            if next.abs() > big {
                g[n + 1] = next / big;
                g[n] /= big;
                scale += ln_big;
            }
            log_scale[n + 1] = scale;
        }
        let rot = phase(kf * theta);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        for n in 0..len {
            let mag = (log_pref + log_scale[n]).exp() * g[n];
            if !mag.is_finite() {
                return Err(Error::Precision(format!(
                    "displacement element ({}, {n}) for |alpha|^2 = {}",
                    n + k,
                    x
                )));
            }
            let lower = rot * mag;
            op.set(n + k, n, lower);
            if k > 0 {
                op.set(n, n + k, rot.conj() * (mag * sign));
            }
        }
    }
    Ok(op)
}

/// Damping strengths and extrapolation order for Abel-regularized traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSchedule<T> {
    epsilons: Vec<T>,
    extrapolation_order: usize,
}

impl<T: Real> DampingSchedule<T> {
    pub fn new(epsilons: Vec<T>, extrapolation_order: usize) -> Result<Self> {
        let s = Self {
            epsilons,
            extrapolation_order,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let eps = &self.epsilons;
        if eps.is_empty() {
            return Err(Error::Schedule("no damping strengths".into()));
        }
        if let Some(e) = eps.iter().find(|e| !(**e > T::zero() && **e <= T::lit(2.0))) {
            return Err(Error::Schedule(format!("damping strength {e} outside (0, 2]")));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("damping strengths must be strictly decreasing".into()));
        }
        if self.extrapolation_order >= 1 && eps.len() < 2 {
            return Err(Error::Schedule(
                "extrapolation needs at least two damping strengths".into(),
            ));
        }
        if self.extrapolation_order + 1 > eps.len() {
            return Err(Error::Schedule(format!(
                "order {} extrapolation needs {} damping strengths, got {}",
                self.extrapolation_order,
                self.extrapolation_order + 1,
                eps.len()
            )));
        }
        Ok(())
    }

    pub fn epsilons(&self) -> &[T] {
        &self.epsilons
    }

    pub fn extrapolation_order(&self) -> usize {
        self.extrapolation_order
    }

    pub fn smallest(&self) -> T {
        *self.epsilons.last().expect("validated non-empty")
    }

    /// Schedule used for traces weighted by growing insertions such as
    /// `(a†a)²`, where the default strengths leave the truncation visible.
    pub fn wide() -> Self {
        Self::new([0.6, 0.4, 0.3, 0.2, 0.15, 0.1].iter().map(|&e| T::lit(e)).collect(), 5)
            .expect("static schedule is valid")
    }

    /// Ten strengths, ninth-order extrapolation. Brings conditionally
    /// convergent symbols such as that of the identity to ~1e-8 for
    /// `|x| ≤ 2`; needs `dim ≥ 200` for a negligible tail.
    pub fn precise() -> Self {
        Self::new(
            [1.0, 0.8, 0.65, 0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1]
                .iter()
                .map(|&e| T::lit(e))
                .collect(),
            9,
        )
        .expect("static schedule is valid")
    }
}

impl<T: Real> Default for DampingSchedule<T> {
    fn default() -> Self {
        Self::new([0.4, 0.2, 0.1, 0.05].iter().map(|&e| T::lit(e)).collect(), 2).expect("static schedule is valid")
    }
}

/// Outcome of a damped trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampedTrace<T> {
    /// Extrapolated `ε → 0` value.
    pub value: Complex<T>,
    /// Difference between the last two extrapolation stages; infinite when
    /// there is only one damping strength.
    pub error_estimate: T,
    /// `t(ε)` for each damping strength, in schedule order.
    pub partial_sums: Vec<Complex<T>>,
    pub converged: bool,
    /// Set when `e^{−ε_min·dim}` is not negligible.
    pub truncation_warning: bool,
}

impl<T: Real> DampedTrace<T> {
    pub fn is_clean(&self) -> bool {
        self.converged && !self.truncation_warning
    }
}

/// Polynomial extrapolation to zero through the last `order + 1` nodes.
///
/// Returns the limit and `|P_order(0) − P_{order−1}(0)|`, the second value
/// computed from the last `order` nodes. Neville's scheme.
pub fn extrapolate_to_zero<T: Real>(nodes: &[T], values: &[Complex<T>], order: usize) -> (Complex<T>, T) {
    debug_assert_eq!(nodes.len(), values.len());
    let k = order + 1;
    let start = nodes.len() - k;
    let h = &nodes[start..];
    let mut p: Vec<Complex<T>> = values[start..].to_vec();
    // after stage s, p[i] holds the degree-s interpolant on nodes i..=i+s
    let mut previous_last = p[k - 1];
    for s in 1..k {
        for i in 0..k - s {
            let (hi, hj) = (h[i], h[i + s]);
            p[i] = (p[i + 1] * hi - p[i] * hj) / (hi - hj);
        }
        // p[k-1-s] is the degree-s value on the last s+1 nodes
        if s < k - 1 {
            previous_last = p[k - 1 - s];
        }
    }
    let value = p[0];
    let err = if order == 0 {
        if nodes.len() >= 2 {
            (values[nodes.len() - 1] - values[nodes.len() - 2]).norm()
        } else {
            T::infinity()
        }
    } else {
        (value - previous_last).norm()
    };
    (value, err)
}

/// Damped trace of an explicit diagonal: `t(ε) = Σ e^{−εn} d_n` for each
/// strength, then extrapolated to `ε = 0`.
///
/// A diagonal whose last quarter is negligible at working precision is an
/// absolutely convergent series; Abel summation then agrees with the plain
/// sum, which is returned directly (the extrapolation would only add its own
/// `O(ε^{order+1})` error).
pub fn damped_sum<T: Real>(diagonal: &[Complex<T>], schedule: &DampingSchedule<T>) -> Result<DampedTrace<T>> {
    schedule.validate()?;
    let dim = diagonal.len();
    if let Some(t) = convergent_sum(diagonal, schedule) {
        return Ok(t);
    }
    let partial_sums: Vec<Complex<T>> = schedule
        .epsilons()
        .iter()
        .map(|&eps| {
            let decay = (-eps).exp();
            let mut w = T::one();
            let mut acc = real(T::zero());
            for d in diagonal {
                acc += *d * w;
                w *= decay;
            }
            acc
        })
        .collect();
    if let Some(bad) = partial_sums.iter().position(|z| !is_finite_c(*z)) {
        return Err(Error::NonFinite(format!(
            "damped partial sum at eps = {}",
            schedule.epsilons()[bad]
        )));
    }
    let (value, error_estimate) =
        extrapolate_to_zero(schedule.epsilons(), &partial_sums, schedule.extrapolation_order());
    let tol = T::lit(tolerances::EXTRAPOLATION_CONVERGED) * value.norm().max(T::one());
    let tail = (-schedule.smallest() * T::from_index(dim)).exp();
    Ok(DampedTrace {
        value,
        error_estimate,
        partial_sums,
        converged: error_estimate.is_finite() && error_estimate <= tol,
        truncation_warning: tail >= T::lit(tolerances::DAMPING_TAIL),
    })
}

fn convergent_sum<T: Real>(diagonal: &[Complex<T>], schedule: &DampingSchedule<T>) -> Option<DampedTrace<T>> {
    let dim = diagonal.len();
    if dim < 4 || !diagonal.iter().all(|z| is_finite_c(*z)) {
        return None;
    }
    let total: T = diagonal.iter().map(|z| z.norm()).sum();
    let tail: T = diagonal[dim - dim / 4..].iter().map(|z| z.norm()).sum();
    if tail > T::epsilon() * total {
        return None;
    }
    let value = pairwise_sum(diagonal);
    Some(DampedTrace {
        value,
        error_estimate: tail,
        partial_sums: vec![value; schedule.epsilons().len()],
        converged: true,
        truncation_warning: false,
    })
}

/// Abel-regularized trace of `a`.
pub fn damped_trace<T: Real>(a: &FockOperator<T>, schedule: &DampingSchedule<T>) -> Result<DampedTrace<T>> {
    damped_sum(&a.diagonal(), schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn annihilator_entries() {
        let a = annihilator::<f64>(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
        let a3 = annihilator::<f64>(3).unwrap();
        assert_relative_eq!(a3.get(1, 2).re, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn dimension_below_two_is_rejected() {
        assert!(matches!(
            annihilator::<f64>(1),
            Err(Error::InvalidDimension { dim: 1, .. })
        ));
        assert!(number_operator::<f64>(0).is_err());
        assert!(parity_operator::<f64>(1).is_err());
        assert!(displacement::<f64>(c(0.1, 0.0), 1).is_err());
    }

    #[test]
    fn canonical_commutator_is_identity_below_the_corner() {
        let dim = 12;
        let a = annihilator::<f64>(dim).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for m in 0..dim {
            for n in 0..dim {
                let z = comm.get(m, n);
                if m == dim - 1 && n == dim - 1 {
                    assert_relative_eq!(z.re, -((dim - 1) as f64), epsilon = 1e-12);
                } else if m == n {
                    assert_relative_eq!(z.re, 1.0, epsilon = 1e-12);
                } else {
                    assert_eq!(z, c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn number_and_parity() {
        let p = parity_operator::<f64>(3).unwrap();
        assert_eq!(p.diagonal(), vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let pp = p.multiply(&p).unwrap();
        assert_eq!(pp, FockOperator::identity(3).unwrap());
        let n = number_operator::<f64>(6).unwrap();
        assert_eq!(n.get(4, 4), c(4.0, 0.0));
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let t = displacement::<f64>(c(0.0, 0.0), 16).unwrap();
        assert_eq!(t, FockOperator::identity(16).unwrap());
    }

    /// `⟨0|T(α)|0⟩` from the power series of `e^{−|α|²/2}`.
    fn vacuum_overlap_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -x / 2.0 / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn vacuum_element_matches_series() {
        let t = displacement::<f64>(c(1.0, 0.0), 64).unwrap();
        let expected = vacuum_overlap_series(1.0);
        assert_relative_eq!(expected, 0.60653066, epsilon = 1e-8);
        assert_relative_eq!(t.get(0, 0).re, expected, epsilon = 1e-14);
        assert!(t.get(0, 0).im.abs() < 1e-15);
    }

    /// Matrix elements from the recurrence `a T = T (a + α)` seeded with the
    /// vacuum row; independent of the Laguerre route.
    fn displacement_by_ladder_recurrence(alpha: C, dim: usize) -> Vec<Vec<C>> {
        let mut t = vec![vec![c(0.0, 0.0); dim]; dim];
        let mut v = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                v = v * (-alpha.conj()) / (n as f64).sqrt();
            }
            t[0][n] = v;
        }
        for m in 0..dim - 1 {
            for n in 0..dim {
                let prev = if n > 0 {
                    t[m][n - 1] * (n as f64).sqrt()
                } else {
                    c(0.0, 0.0)
                };
                t[m + 1][n] = (prev + alpha * t[m][n]) / ((m + 1) as f64).sqrt();
            }
        }
        t
    }

    #[test]
    fn laguerre_elements_match_ladder_recurrence() {
        let alpha = c(0.7, -0.4);
        let dim = 40;
        let t = displacement::<f64>(alpha, dim).unwrap();
        let r = displacement_by_ladder_recurrence(alpha, dim);
        for m in 0..dim {
            for n in 0..dim {
                assert!((t.get(m, n) - r[m][n]).norm() < 1e-12, "({m},{n})");
            }
        }
    }

    #[test]
    fn large_amplitudes_do_not_overflow() {
        let t = displacement::<f64>(c(6.0, 6.0), 256).unwrap();
        assert!(t.max_abs() <= 1.0 + 1e-9);
        let t32 = displacement::<f32>(Complex::new(5.0, -3.0), 128).unwrap();
        assert!(t32.max_abs() <= 1.0 + 1e-4);
    }

    #[test]
    fn ray_representation_phase() {
        let dim = 64;
        let (al, be) = (c(1.0, 0.0), c(0.0, 1.0));
        let lhs = displacement(al, dim)
            .unwrap()
            .multiply(&displacement(be, dim).unwrap())
            .unwrap();
        let ph = ((al * be.conj() - al.conj() * be) / 2.0).exp();
        assert!((ph - c(0.0, -1.0).exp()).norm() < 1e-15);
        let rhs = displacement(al + be, dim).unwrap().scale(ph);
        for m in 0..dim / 2 {
            for n in 0..dim / 2 {
                assert!((lhs.get(m, n) - rhs.get(m, n)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn adjoint_reverses_displacement() {
        let dim = 48;
        let alpha = c(0.8, 0.3);
        let t = displacement(alpha, dim).unwrap();
        let tm = displacement(-alpha, dim).unwrap();
        assert!(t.adjoint().max_abs_diff(&tm).unwrap() < 1e-13);
        assert_eq!(t.adjoint().adjoint(), t);
    }

    #[test]
    fn parity_conjugation_reverses_displacement() {
        let dim = 40;
        let alpha = c(-0.5, 1.1);
        let p = parity_operator(dim).unwrap();
        let lhs = p.multiply(&displacement(alpha, dim).unwrap()).unwrap();
        let rhs = displacement(-alpha, dim).unwrap().multiply(&p).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn multiply_identity_and_shape_errors() {
        let a = displacement(c(0.3, 0.2), 8).unwrap();
        let id = FockOperator::identity(8).unwrap();
        assert_eq!(id.multiply(&a).unwrap(), a);
        let b = FockOperator::<f64>::identity(9).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::ShapeMismatch { .. })));
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn unitarity_leakage_confined_to_top_levels() {
        let dim = 96;
        for alpha in [c(1.0, 0.0), c(0.5, -1.2), c(-1.5, 0.7)] {
            let t = displacement(alpha, dim).unwrap();
            let tt = t.adjoint().multiply(&t).unwrap();
            // column n spreads over roughly n ± 3|α|√n, so the lower half is clear
            let cut = dim / 2;
            for m in 0..cut {
                for n in 0..cut {
                    let target = if m == n { 1.0 } else { 0.0 };
                    assert!((tt.get(m, n) - c(target, 0.0)).norm() < 1e-6, "({m},{n})");
                }
            }
        }
    }

    #[test]
    fn parity_trace_single_strength() {
        let s = DampingSchedule::new(vec![0.1], 0).unwrap();
        let tr = damped_trace(&parity_operator::<f64>(400).unwrap(), &s).unwrap();
        // geometric series: sum (-1)^n e^{-0.1 n} = 1/(1 + e^{-0.1})
        let oracle = 1.0 / (1.0 + (-0.1f64).exp());
        assert_relative_eq!(oracle, 0.52498, epsilon = 1e-5);
        assert_relative_eq!(tr.value.re, oracle, epsilon = 1e-12);
        assert!(tr.error_estimate.is_infinite());
    }

    #[test]
    fn parity_trace_extrapolates_to_half() {
        let tr = damped_trace(&parity_operator::<f64>(400).unwrap(), &DampingSchedule::default()).unwrap();
        assert!((tr.value.re - 0.5).abs() < 1e-3);
        assert!(tr.converged);
        assert!(!tr.truncation_warning);
    }

    #[test]
    fn identity_trace_is_flagged_divergent() {
        let tr = damped_trace(
            &FockOperator::<f64>::identity(400).unwrap(),
            &DampingSchedule::default(),
        )
        .unwrap();
        assert_eq!(tr.partial_sums.len(), 4);
        assert!(tr.partial_sums.iter().all(|z| z.re.is_finite()));
        assert!(tr.partial_sums.windows(2).all(|w| w[1].re > w[0].re));
        assert!(!tr.converged);
    }

    #[test]
    fn short_truncation_raises_warning() {
        let tr = damped_trace(&parity_operator::<f64>(64).unwrap(), &DampingSchedule::default()).unwrap();
        assert!(tr.truncation_warning);
    }

    #[test]
    fn schedule_validation() {
        assert!(matches!(
            DampingSchedule::<f64>::new(vec![0.1], 1),
            Err(Error::Schedule(_))
        ));
        assert!(DampingSchedule::<f64>::new(vec![0.1, 0.2], 1).is_err());
        assert!(DampingSchedule::<f64>::new(vec![0.2, 0.2], 1).is_err());
        assert!(DampingSchedule::<f64>::new(vec![2.5, 0.2], 1).is_err());
        assert!(DampingSchedule::<f64>::new(vec![0.2, 0.0], 1).is_err());
        assert!(DampingSchedule::<f64>::new(vec![], 0).is_err());
        assert!(DampingSchedule::<f64>::new(vec![2.0, 0.1], 1).is_ok());
    }

    #[test]
    fn extrapolation_is_exact_on_polynomials() {
        let nodes = [0.4, 0.2, 0.1, 0.05];
        let vals: Vec<C> = nodes.iter().map(|&e| c(3.0 - 2.0 * e + 5.0 * e * e, e)).collect();
        let (v, err) = extrapolate_to_zero(&nodes, &vals, 2);
        assert!((v - c(3.0, 0.0)).norm() < 1e-12);
        // the degree-1 stage misses the quadratic term: 5 * 0.1 * 0.05
        assert_relative_eq!(err, 0.025, epsilon = 1e-12);
    }

    #[test]
    fn coherent_amplitudes_are_normalized() {
        let psi = coherent_amplitudes(c(0.7, 0.3), 64).unwrap();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
        // T(β)|0⟩ column agrees
        let t = displacement(c(0.7, 0.3), 64).unwrap();
        for (n, z) in psi.iter().enumerate().take(40) {
            assert!((t.get(n, 0) - z).norm() < 1e-13);
        }
    }

    #[test]
    fn quadratures_satisfy_ccr_on_interior() {
        let dim = 20;
        let q = position_operator::<f64>(dim).unwrap();
        let p = momentum_operator::<f64>(dim).unwrap();
        let comm = q.commutator(&p).unwrap();
        for n in 0..dim - 1 {
            assert!((comm.get(n, n) - c(0.0, 1.0)).norm() < 1e-12);
        }
    }
}
