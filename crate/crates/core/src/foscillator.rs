//! f-oscillators: nonlinearity functions `f(n)`, the deformed ladder
//! operators `A = a f(a†a)`, their commutator, and the classical amplitude
//! evolution `a(t) = a e^{−iχ(|a|²)t}`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockOperator};
use crate::kproduct::KContext;
use crate::scalar::{real, Real};
use crate::tolerances;

/// Diagonal nonlinearity `n ↦ f(n)`.
///
/// JSON form: `{"kind":"q_exact","lambda":0.1}`,
/// `{"kind":"table","values":[...]}`, `{"kind":"identity"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityFunction<T> {
    Identity,
    /// `√(sinh(λn)/(λn))`, with `f(0) = 1`.
    QExact {
        lambda: T,
    },
    /// `1 + (λ²/12) n²`, the weak-nonlinearity expansion of `QExact`.
    QQuadratic {
        lambda: T,
    },
    Table {
        values: Vec<T>,
    },
}

impl<T: Real> NonlinearityFunction<T> {
    pub fn q_exact(lambda: T) -> Self {
        Self::QExact { lambda }
    }

    pub fn q_quadratic(lambda: T) -> Self {
        Self::QQuadratic { lambda }
    }

    /// Table of `n^power` for `n < dim`.
    pub fn number_power(power: i32, dim: usize) -> Self {
        Self::Table {
            values: (0..dim).map(|n| T::from_index(n).powi(power)).collect(),
        }
    }

    /// Deformation parameter, where there is one.
    pub fn lambda(&self) -> Option<T> {
        match self {
            Self::QExact { lambda } | Self::QQuadratic { lambda } => Some(*lambda),
            _ => None,
        }
    }

    pub fn value(&self, n: usize) -> Result<T> {
        let v = match self {
            Self::Identity => T::one(),
            Self::QExact { lambda } => {
                let x = *lambda * T::from_index(n);
                if x == T::zero() {
                    T::one()
                } else if x.abs() < T::lit(1e-4) {
                    (T::one() + x * x / T::lit(6.0)).sqrt()
                } else {
                    (x.sinh() / x).sqrt()
                }
            }
            Self::QQuadratic { lambda } => {
                let nf = T::from_index(n);
                T::one() + *lambda * *lambda / T::lit(12.0) * nf * nf
            }
            Self::Table { values } => *values.get(n).ok_or(Error::TableTooShort {
                len: values.len(),
                dim: n + 1,
            })?,
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("f({n})")));
        }
        Ok(v)
    }

    pub fn values(&self, dim: usize) -> Result<Vec<T>> {
        if let Self::Table { values } = self {
            if values.len() < dim {
                return Err(Error::TableTooShort { len: values.len(), dim });
            }
        }
        (0..dim).map(|n| self.value(n)).collect()
    }

    /// `diag(f(0), …, f(dim−1))` as complex insertion weights.
    pub fn insertion(&self, dim: usize) -> Result<Vec<Complex<T>>> {
        Ok(self.values(dim)?.into_iter().map(real).collect())
    }

    pub fn operator(&self, dim: usize) -> Result<FockOperator<T>> {
        FockOperator::from_real_diagonal(&self.values(dim)?)
    }
}

/// `A = a · f(a†a)`
pub fn deformed_annihilator<T: Real>(f: &NonlinearityFunction<T>, dim: usize) -> Result<FockOperator<T>> {
    let a = fock::annihilator(dim)?;
    a.right_diagonal(&f.insertion(dim)?)
}

/// `A† = f(a†a) · a†`
pub fn deformed_creator<T: Real>(f: &NonlinearityFunction<T>, dim: usize) -> Result<FockOperator<T>> {
    Ok(deformed_annihilator(f, dim)?.adjoint())
}

/// Diagonal of `[A, A†]` on levels `n < dim − 2`.
///
/// Fails with a consistency error if an interior off-diagonal entry exceeds
/// the commutator tolerance.
pub fn commutator_spectrum<T: Real>(f: &NonlinearityFunction<T>, dim: usize) -> Result<Vec<T>> {
    if dim < 3 {
        return Err(Error::InvalidDimension { dim, min: 3 });
    }
    let a = deformed_annihilator(f, dim)?;
    let comm = a.commutator(&a.adjoint())?;
    let interior = dim - 2;
    let tol = T::lit(tolerances::COMMUTATOR_DIAGONAL);
    for m in 0..interior {
        for n in 0..interior {
            if m != n && comm.get(m, n).norm() > tol {
                return Err(Error::Consistency(format!(
                    "[A, A†] has off-diagonal entry {} at ({m}, {n})",
                    comm.get(m, n).norm()
                )));
            }
        }
    }
    Ok((0..interior).map(|n| comm.get(n, n).re).collect())
}

/// Classical amplitude with an energy-dependent frequency `χ(|a|²)`.
pub struct AmplitudeState<T, F> {
    pub a0: Complex<T>,
    pub chi: F,
}

impl<T: Real, F: Fn(T) -> T> AmplitudeState<T, F> {
    pub fn new(a0: Complex<T>, chi: F) -> Self {
        Self { a0, chi }
    }

    /// Accumulated phase rate `χ(|a0|²)`.
    pub fn frequency(&self) -> T {
        (self.chi)(self.a0.norm_sqr())
    }
}

/// `a(t)` in polar form `(|a0|, arg a0 − χt)`; the modulus is `|a0|` bit for bit.
pub fn evolve_amplitude_polar<T: Real, F: Fn(T) -> T>(state: &AmplitudeState<T, F>, t: T) -> (T, T) {
    let (r, theta) = state.a0.to_polar();
    (r, theta - state.frequency() * t)
}

/// `a(t) = a0 · e^{−iχ(|a0|²)t}`
pub fn evolve_amplitude<T: Real, F: Fn(T) -> T>(state: &AmplitudeState<T, F>, t: T) -> Complex<T> {
    let (r, theta) = evolve_amplitude_polar(state, t);
    Complex::from_polar(r, theta)
}

/// `K = diag(f(n))`, so that `k_multiply(A, B)` is `A f(a†a) B`.
///
/// Nonpositive values leave the context usable for K-products; only the
/// `√K` transport is refused.
pub fn k_context_from_f<T: Real>(f: &NonlinearityFunction<T>, dim: usize) -> Result<KContext<T>> {
    KContext::new(f.operator(dim)?)
}
