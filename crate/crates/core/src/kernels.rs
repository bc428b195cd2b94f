//! Three-point star-product kernels `K(x₁, x₂; x)`.
//!
//! The third argument is always the evaluation point `x` of
//! `(f ⋆ g)(x) = ∬ f(x₁) g(x₂) K(x₁, x₂; x) dx₁ dx₂`.
//!
//! Numeric kernels are regularized traces
//! `Tr[D̂(x₁) F D̂(x₂) Û(x)]` with a diagonal insertion `F`; the analytic
//! ones are the Groenewold kernel and its λ²-corrected form.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, damped_sum, parity_diagonal, DampingSchedule, FockOperator};
use crate::foscillator::NonlinearityFunction;
use crate::scalar::{phase, real, Real};
use crate::weyl::PhasePoint;

/// Kernel value at a point triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelSample<T> {
    pub x1: PhasePoint<T>,
    pub x2: PhasePoint<T>,
    pub x_out: PhasePoint<T>,
    pub value: Complex<T>,
    /// Extrapolation-stage difference; exactly zero for analytic kernels.
    pub error_estimate: T,
    /// Numeric kernels only: extrapolation converged and truncation tail
    /// negligible.
    pub clean: bool,
}

/// Antisymmetrized kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureSample<T> {
    pub x1: PhasePoint<T>,
    pub x2: PhasePoint<T>,
    pub x_out: PhasePoint<T>,
    pub value: Complex<T>,
}

/// Flat coordinates of a point triple, as read from batch files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple<T> {
    pub q1: T,
    pub p1: T,
    pub q2: T,
    pub p2: T,
    pub q: T,
    pub p: T,
}

impl<T: Real> Triple<T> {
    pub fn points(&self) -> Result<(PhasePoint<T>, PhasePoint<T>, PhasePoint<T>)> {
        Ok((
            PhasePoint::new(self.q1, self.p1)?,
            PhasePoint::new(self.q2, self.p2)?,
            PhasePoint::new(self.q, self.p)?,
        ))
    }

    pub fn from_points(x1: PhasePoint<T>, x2: PhasePoint<T>, x: PhasePoint<T>) -> Self {
        Self {
            q1: x1.q,
            p1: x1.p,
            q2: x2.q,
            p2: x2.p,
            q: x.q,
            p: x.p,
        }
    }
}

/// Phase `2(q p₁ − q₁ p + q₁ p₂ − q₂ p₁ + q₂ p − q p₂)` of the Groenewold kernel.
pub fn groenewold_phase<T: Real>(x1: PhasePoint<T>, x2: PhasePoint<T>, x: PhasePoint<T>) -> T {
    T::lit(2.0) * (x.q * x1.p - x1.q * x.p + x1.q * x2.p - x2.q * x1.p + x2.q * x.p - x.q * x2.p)
}

/// `π⁻² exp(i·groenewold_phase)`
pub fn groenewold_analytic<T: Real>(x1: PhasePoint<T>, x2: PhasePoint<T>, x_out: PhasePoint<T>) -> KernelSample<T> {
    let inv_pi2 = T::one() / (T::PI() * T::PI());
    KernelSample {
        x1,
        x2,
        x_out,
        value: phase(groenewold_phase(x1, x2, x_out)) * inv_pi2,
        error_estimate: T::zero(),
        clean: true,
    }
}

/// `μ = (q − q₁ − q₂)² + (p − p₁ − p₂)²`, symmetric in `x₁ ↔ x₂` bit for bit.
pub fn mu<T: Real>(x1: PhasePoint<T>, x2: PhasePoint<T>, x: PhasePoint<T>) -> T {
    let dq = x.q - (x1.q + x2.q);
    let dp = x.p - (x1.p + x2.p);
    dq * dq + dp * dp
}

/// `1 + (λ²/192)(μ − 1)²`
pub fn lambda_correction<T: Real>(lambda: T, mu: T) -> T {
    let d = mu - T::one();
    T::one() + lambda * lambda / T::lit(192.0) * d * d
}

/// `K_G · (1 + (λ²/192)(μ − 1)²)`
pub fn lambda_kernel_analytic<T: Real>(
    lambda: T,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
) -> KernelSample<T> {
    let mut k = groenewold_analytic(x1, x2, x_out);
    k.value *= lambda_correction(lambda, mu(x1, x2, x_out));
    k
}

/// `Tr[D̂(x₁) diag(w) D̂(x₂) Û(x)]`, damped and extrapolated.
pub fn kernel_with_insertion<T: Real>(
    insertion: &[Complex<T>],
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<KernelSample<T>> {
    if insertion.len() != dim {
        return Err(Error::shape(dim, format!("insertion of {}", insertion.len())));
    }
    let two = T::lit(2.0);
    let pi = T::PI();
    let parity = parity_diagonal::<T>(dim);
    // D̂(x₁) F = T(2α₁) · diag((−1)ⁿ f(n) / π)
    let left_diag: Vec<Complex<T>> = parity.iter().zip(insertion).map(|(s, f)| *s * *f / pi).collect();
    let left = fock::displacement(x1.alpha() * two, dim)?.right_diagonal(&left_diag)?;
    let d2 = fock::displacement(x2.alpha() * two, dim)?
        .right_diagonal(&parity.iter().map(|s| *s / pi).collect::<Vec<_>>())?;
    let middle = left.multiply(&d2)?;
    let u = fock::displacement(x_out.alpha() * two, dim)?
        .right_diagonal(&parity.iter().map(|s| *s * two).collect::<Vec<_>>())?;
    let diag = middle.product_diagonal(&u)?;
    let t = damped_sum(&diag, schedule)?;
    Ok(KernelSample {
        x1,
        x2,
        x_out,
        value: t.value,
        error_estimate: t.error_estimate,
        clean: t.is_clean(),
    })
}

/// Numeric kernel with the insertion `f(a†a)` between the two dequantizers.
/// With `f ≡ 1` this is the numeric Groenewold kernel.
pub fn kernel_numeric<T: Real>(
    f: &NonlinearityFunction<T>,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<KernelSample<T>> {
    kernel_with_insertion(&f.insertion(dim)?, x1, x2, x_out, dim, schedule)
}

/// Same trace with the insertion moved to the front:
/// `Tr[F D̂(x₂) Û(x) D̂(x₁)]`. Equal to [`kernel_numeric`] by cyclicity.
pub fn kernel_numeric_leading_insertion<T: Real>(
    f: &NonlinearityFunction<T>,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<KernelSample<T>> {
    let two = T::lit(2.0);
    let pi = T::PI();
    let parity = parity_diagonal::<T>(dim);
    let d = |x: PhasePoint<T>, s: T| -> Result<FockOperator<T>> {
        fock::displacement(x.alpha() * two, dim)?.right_diagonal(&parity.iter().map(|p| *p * s).collect::<Vec<_>>())
    };
    let product = d(x2, T::one() / pi)?
        .multiply(&d(x_out, two)?)?
        .left_diagonal(&f.insertion(dim)?)?;
    let diag = product.product_diagonal(&d(x1, T::one() / pi)?)?;
    let t = damped_sum(&diag, schedule)?;
    Ok(KernelSample {
        x1,
        x2,
        x_out,
        value: t.value,
        error_estimate: t.error_estimate,
        clean: t.is_clean(),
    })
}

/// Generating-function kernel with insertion `e^{iτn}`.
pub fn tau_kernel<T: Real>(
    tau: T,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<KernelSample<T>> {
    let insertion: Vec<Complex<T>> = (0..dim).map(|n| phase(tau * T::from_index(n))).collect();
    kernel_with_insertion(&insertion, x1, x2, x_out, dim, schedule)
}

/// `−[K_τ(h) − 2K_τ(0) + K_τ(−h)]/h²`, the `(a†a)²`-insertion kernel
/// obtained from the generating function.
pub fn tau_second_difference<T: Real>(
    h: T,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<KernelSample<T>> {
    let plus = tau_kernel(h, x1, x2, x_out, dim, schedule)?;
    let zero = tau_kernel(T::zero(), x1, x2, x_out, dim, schedule)?;
    let minus = tau_kernel(-h, x1, x2, x_out, dim, schedule)?;
    let h2 = h * h;
    let value = -(plus.value - zero.value * T::lit(2.0) + minus.value) / h2;
    let err = (plus.error_estimate + T::lit(2.0) * zero.error_estimate + minus.error_estimate) / h2;
    Ok(KernelSample {
        x1,
        x2,
        x_out,
        value,
        error_estimate: err,
        clean: plus.clean && zero.clean && minus.clean,
    })
}

/// Numeric vs analytic λ² coefficient at one triple.
///
/// With `f = 1 + (λ²/12)n²` the λ² correction predicts
/// `Tr[D̂₁ n² D̂₂ Û] / K_G = (μ − 1)²/16`, independent of λ; `r_num` is the
/// left-hand side computed as a ratio of two regularized traces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeformationReport<T> {
    pub x1: PhasePoint<T>,
    pub x2: PhasePoint<T>,
    pub x_out: PhasePoint<T>,
    pub mu: T,
    pub r_num: Complex<T>,
    pub r_ana: T,
    pub abs_diff: T,
    pub error_estimate: T,
    pub clean: bool,
}

pub fn deformation_check<T: Real>(
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
    dim: usize,
    schedule: &DampingSchedule<T>,
) -> Result<DeformationReport<T>> {
    let base = kernel_numeric(&NonlinearityFunction::Identity, x1, x2, x_out, dim, schedule)?;
    let squared = kernel_numeric(
        &NonlinearityFunction::number_power(2, dim),
        x1,
        x2,
        x_out,
        dim,
        schedule,
    )?;
    let den = base.value.norm();
    if den < T::lit(10.0) * base.error_estimate {
        return Err(Error::IllConditioned {
            denominator: den.as_f64(),
            error: base.error_estimate.as_f64(),
        });
    }
    let r_num = squared.value / base.value;
    let m = mu(x1, x2, x_out);
    let r_ana = (m - T::one()) * (m - T::one()) / T::lit(16.0);
    let error_estimate = (squared.error_estimate + r_num.norm() * base.error_estimate) / den;
    Ok(DeformationReport {
        x1,
        x2,
        x_out,
        mu: m,
        r_num,
        r_ana,
        abs_diff: (r_num - real(r_ana)).norm(),
        error_estimate,
        clean: base.clean && squared.clean,
    })
}

/// Least-squares `R ≈ c₀ + c₁μ + c₂μ²` through the real parts of `r_num`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticFit<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub rms_residual: T,
}

impl<T: Real> QuadraticFit<T> {
    pub fn eval(&self, mu: T) -> T {
        self.c0 + self.c1 * mu + self.c2 * mu * mu
    }
}

pub fn fit_ratio_quadratic<T: Real>(reports: &[DeformationReport<T>]) -> Result<QuadraticFit<T>> {
    if reports.len() < 3 {
        return Err(Error::Validation(vec![format!(
            "need at least three reports to fit a quadratic, got {}",
            reports.len()
        )]));
    }
    // normal equations
    let mut s = [T::zero(); 5];
    let mut b = [T::zero(); 3];
    for r in reports {
        let mut pw = T::one();
        for k in 0..5 {
            s[k] += pw;
            if k < 3 {
                b[k] += pw * r.r_num.re;
            }
            pw *= r.mu;
        }
    }
    let mut a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    // Gaussian elimination with partial pivoting on the 3x3 system
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))
            .expect("non-empty");
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col].abs() <= T::epsilon() * s[4].abs().max(T::one()) {
            return Err(Error::Validation(vec!["μ values do not determine a quadratic".into()]));
        }
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut c = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut acc = b[i];
        for j in i + 1..3 {
            acc -= a[i][j] * c[j];
        }
        c[i] = acc / a[i][i];
    }
    let fit = QuadraticFit {
        c0: c[0],
        c1: c[1],
        c2: c[2],
        rms_residual: T::zero(),
    };
    let ss: T = reports
        .iter()
        .map(|r| {
            let d = r.r_num.re - fit.eval(r.mu);
            d * d
        })
        .sum();
    Ok(QuadraticFit {
        rms_residual: (ss / T::from_index(reports.len())).sqrt(),
        ..fit
    })
}

/// Which analytic kernel the structure constants come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureKind<T> {
    Groenewold,
    Lambda { lambda: T },
}

/// `C(x₁, x₂; x) = K(x₁, x₂; x) − K(x₂, x₁; x)`; for the λ kind the common
/// factor `1 + (λ²/192)(μ − 1)²` multiplies the Groenewold constants.
pub fn structure_constants<T: Real>(
    kind: StructureKind<T>,
    x1: PhasePoint<T>,
    x2: PhasePoint<T>,
    x_out: PhasePoint<T>,
) -> StructureSample<T> {
    let c = groenewold_analytic(x1, x2, x_out).value - groenewold_analytic(x2, x1, x_out).value;
    let value = match kind {
        StructureKind::Groenewold => c,
        StructureKind::Lambda { lambda } => c * lambda_correction(lambda, mu(x1, x2, x_out)),
    };
    StructureSample { x1, x2, x_out, value }
}
