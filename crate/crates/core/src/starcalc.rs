//! Star products and brackets of symbols.
//!
//! Two routes: the kernel route integrates `fa(x₁) fb(x₂) K(x₁, x₂; x)` with
//! the trapezoidal rule on the symbols' grid, the operator route maps both
//! symbols to operators, multiplies, and maps back.
//!
//! The kernel-route double sum is not evaluated term by term. The
//! Groenewold phase splits as
//! `2(q p₁ − q₁ p) + 2(q₂ u + p₂ v)` with `u = p − p₁`, `v = q₁ − q`, so the
//! inner sum over `x₂` is a function `H(u, v)` on the difference lattice,
//! built in two separable passes. The λ-corrected kernel adds a quartic
//! polynomial in `(q₂, p₂)` with coefficients depending on `(u, v)`, which
//! is handled by carrying the moments `q₂ᵐ p₂ⁿ`, `m + n ≤ 4`. The result is
//! the same trapezoidal sum up to rounding.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DampingSchedule, FockOperator};
use crate::foscillator::NonlinearityFunction;
use crate::scalar::{phase, real, Real};
use crate::tolerances;
use crate::weyl::{operator_of, symbol_of, PhaseGrid, SymbolField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    KernelQuadrature,
    Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind<T> {
    Groenewold,
    FDeformed { f: NonlinearityFunction<T> },
}

impl<T: Real> KernelKind<T> {
    /// Diagonal insertion between the two operators; `None` for the bare
    /// product.
    fn insertion(&self, dim: usize) -> Result<Option<Vec<Complex<T>>>> {
        match self {
            KernelKind::Groenewold
            | KernelKind::FDeformed {
                f: NonlinearityFunction::Identity,
            } => Ok(None),
            KernelKind::FDeformed { f } => f.insertion(dim).map(Some),
        }
    }

    /// Coefficient `λ²/192` of the analytic correction used on the kernel
    /// route.
    fn analytic_correction(&self) -> Result<T> {
        match self {
            KernelKind::Groenewold
            | KernelKind::FDeformed {
                f: NonlinearityFunction::Identity,
            } => Ok(T::zero()),
            KernelKind::FDeformed {
                f: NonlinearityFunction::QQuadratic { lambda } | NonlinearityFunction::QExact { lambda },
            } => Ok(*lambda * *lambda / T::lit(192.0)),
            KernelKind::FDeformed {
                f: NonlinearityFunction::Table { .. },
            } => Err(Error::Unsupported(
                "tabulated f has no analytic kernel; use the operator route".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarConfig<T> {
    pub route: Route,
    pub kernel: KernelKind<T>,
    pub grid: PhaseGrid<T>,
    pub dim: usize,
    pub schedule: DampingSchedule<T>,
}

impl<T: Real> StarConfig<T> {
    pub fn new(route: Route, kernel: KernelKind<T>, grid: PhaseGrid<T>, dim: usize) -> Self {
        Self {
            route,
            kernel,
            grid,
            dim,
            schedule: DampingSchedule::default(),
        }
    }

    pub fn with_schedule(mut self, schedule: DampingSchedule<T>) -> Self {
        self.schedule = schedule;
        self
    }

    fn check_inputs(&self, fields: &[&SymbolField<T>]) -> Result<()> {
        if self.dim < crate::fock::MIN_DIM {
            return Err(Error::InvalidDimension {
                dim: self.dim,
                min: crate::fock::MIN_DIM,
            });
        }
        for f in fields {
            self.grid.same_as(&f.grid)?;
            if self.route == Route::KernelQuadrature && !f.decays_at_boundary() {
                return Err(Error::Contract(
                    "kernel quadrature needs symbols that decay at the grid boundary".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `fa ⋆ fb` on the grid of `cfg`.
pub fn star<T: Real>(fa: &SymbolField<T>, fb: &SymbolField<T>, cfg: &StarConfig<T>) -> Result<SymbolField<T>> {
    cfg.check_inputs(&[fa, fb])?;
    match cfg.route {
        Route::Operator => {
            let a = reconstruct(fa, cfg)?;
            let b = reconstruct(fb, cfg)?;
            star_operators(&a, &b, cfg)
        }
        Route::KernelQuadrature => kernel_star(fa, fb, cfg),
    }
}

fn reconstruct<T: Real>(f: &SymbolField<T>, cfg: &StarConfig<T>) -> Result<FockOperator<T>> {
    Ok(operator_of(f, cfg.dim)?.operator)
}

/// `A F B` with the kernel's insertion `F`.
fn deformed_product<T: Real>(
    a: &FockOperator<T>,
    b: &FockOperator<T>,
    kind: &KernelKind<T>,
) -> Result<FockOperator<T>> {
    match kind.insertion(a.dim())? {
        None => a.multiply(b),
        Some(d) => a.right_diagonal(&d)?.multiply(b),
    }
}

fn restrict<T: Real>(op: FockOperator<T>, dim: usize) -> Result<FockOperator<T>> {
    match op.dim() {
        d if d == dim => Ok(op),
        d if d > dim => op.leading_block(dim),
        d => Err(Error::shape(dim, d)),
    }
}

/// Symbol of `A F B` for operators given directly.
///
/// Operators may be larger than `cfg.dim`: the product is formed at their
/// dimension and then cut to the leading `cfg.dim` levels, which removes
/// truncation artifacts from unbounded operators such as `q̂`, `p̂`.
pub fn star_operators<T: Real>(
    a: &FockOperator<T>,
    b: &FockOperator<T>,
    cfg: &StarConfig<T>,
) -> Result<SymbolField<T>> {
    let product = restrict(deformed_product(a, b, &cfg.kernel)?, cfg.dim)?;
    symbol_of(&product, &cfg.grid, &cfg.schedule)
}

/// `star(fa, fb) − star(fb, fa)`, unnormalized.
pub fn moyal_bracket<T: Real>(fa: &SymbolField<T>, fb: &SymbolField<T>, cfg: &StarConfig<T>) -> Result<SymbolField<T>> {
    cfg.check_inputs(&[fa, fb])?;
    let mut out = match cfg.route {
        Route::Operator => {
            let a = reconstruct(fa, cfg)?;
            let b = reconstruct(fb, cfg)?;
            let c = operator_bracket(&a, &b, &cfg.kernel)?;
            symbol_of(&c, &cfg.grid, &cfg.schedule)?
        }
        Route::KernelQuadrature => kernel_star(fa, fb, cfg)?.sub(&kernel_star(fb, fa, cfg)?)?,
    };
    if fa.real_valued && fb.real_valued {
        flag_imaginary(&mut out);
    }
    Ok(out)
}

/// Bracket of operators given directly; see [`star_operators`] for the
/// dimension handling.
pub fn moyal_bracket_operators<T: Real>(
    a: &FockOperator<T>,
    b: &FockOperator<T>,
    cfg: &StarConfig<T>,
) -> Result<SymbolField<T>> {
    let c = restrict(operator_bracket(a, b, &cfg.kernel)?, cfg.dim)?;
    let mut out = symbol_of(&c, &cfg.grid, &cfg.schedule)?;
    if a.is_hermitian(T::lit(tolerances::HERMITIAN)) && b.is_hermitian(T::lit(tolerances::HERMITIAN)) {
        flag_imaginary(&mut out);
    }
    Ok(out)
}

fn operator_bracket<T: Real>(
    a: &FockOperator<T>,
    b: &FockOperator<T>,
    kind: &KernelKind<T>,
) -> Result<FockOperator<T>> {
    deformed_product(a, b, kind)?.sub(&deformed_product(b, a, kind)?)
}

fn flag_imaginary<T: Real>(f: &mut SymbolField<T>) {
    let re = f.max_real();
    if re > T::lit(tolerances::REAL_VALUED) {
        f.warnings
            .push(format!("bracket of real symbols has real part up to {re}"));
    }
}

/// Largest magnitude of `{{a,b},c} + {{b,c},a} + {{c,a},b}`.
///
/// The operator route evaluates the nested brackets on the reconstructed
/// operators and takes the symbol of the cyclic sum over the whole grid.
/// The kernel route nests kernel-quadrature brackets and reports the
/// maximum over the interior half of the grid, where quadrature truncation
/// does not reach.
pub fn jacobi_defect<T: Real>(
    fa: &SymbolField<T>,
    fb: &SymbolField<T>,
    fc: &SymbolField<T>,
    cfg: &StarConfig<T>,
) -> Result<T> {
    cfg.check_inputs(&[fa, fb, fc])?;
    match cfg.route {
        Route::Operator => {
            let a = reconstruct(fa, cfg)?;
            let b = reconstruct(fb, cfg)?;
            let c = reconstruct(fc, cfg)?;
            let k = &cfg.kernel;
            let cyc = operator_bracket(&operator_bracket(&a, &b, k)?, &c, k)?
                .add(&operator_bracket(&operator_bracket(&b, &c, k)?, &a, k)?)?
                .add(&operator_bracket(&operator_bracket(&c, &a, k)?, &b, k)?)?;
            Ok(symbol_of(&cyc, &cfg.grid, &cfg.schedule)?.max_abs())
        }
        Route::KernelQuadrature => {
            let br = |x: &SymbolField<T>, y: &SymbolField<T>| -> Result<SymbolField<T>> {
                kernel_star(x, y, cfg)?.sub(&kernel_star(y, x, cfg)?)
            };
            let cyc = br(&br(fa, fb)?, fc)?
                .add(&br(&br(fb, fc)?, fa)?)?
                .add(&br(&br(fc, fa)?, fb)?)?;
            let zero = SymbolField::zeros(cfg.grid)?;
            cyc.max_abs_diff_interior_half(&zero)
        }
    }
}

/// Exponents `(m, n)` of the moments `q₂ᵐ p₂ⁿ` entering `(μ − 1)²`.
const MOMENTS: [(i32, i32); 13] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (0, 2),
    (1, 1),
    (3, 0),
    (1, 2),
    (2, 1),
    (0, 3),
    (4, 0),
    (2, 2),
    (0, 4),
];

/// Coefficients of `(μ − 1)²` on [`MOMENTS`], where
/// `μ = (a − q₂)² + (b − p₂)²`, `a = q − q₁`, `b = p − p₁`.
fn mu_polynomial<T: Real>(a: T, b: T) -> [T; 13] {
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let s = a * a + b * b - T::one();
    [
        s * s,
        -four * a * s,
        -four * b * s,
        four * a * a + two * s,
        four * b * b + two * s,
        T::lit(8.0) * a * b,
        -four * a,
        -four * a,
        -four * b,
        -four * b,
        T::one(),
        two,
        T::one(),
    ]
}

fn kernel_star<T: Real>(fa: &SymbolField<T>, fb: &SymbolField<T>, cfg: &StarConfig<T>) -> Result<SymbolField<T>> {
    let corr = cfg.kernel.analytic_correction()?;
    for (name, f) in [("left", fa), ("right", fb)] {
        if f.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("{name} symbol has non-finite samples")));
        }
    }
    let g = cfg.grid;
    let (nq, np) = (g.nq, g.np);
    let (wq, wp) = (g.q_weights(), g.p_weights());
    let two = T::lit(2.0);
    let (dq, dp) = (g.dq(), g.dp());
    // difference lattices: u = p − p₁ = (j − j₁) dp, v = q₁ − q = (i₁ − i) dq
    let nu = 2 * np - 1;
    let nv = 2 * nq - 1;
    let u_at = |k: usize| T::from_index(k) * dp - T::from_index(np - 1) * dp;
    let v_at = |k: usize| T::from_index(k) * dq - T::from_index(nq - 1) * dq;
    let moments: &[(i32, i32)] = if corr == T::zero() { &MOMENTS[..1] } else { &MOMENTS[..] };

    // phase tables
    let p_v: Vec<Complex<T>> = (0..np)
        .flat_map(|j| (0..nv).map(move |kv| (j, kv)))
        .map(|(j, kv)| phase(two * g.p(j) * v_at(kv)))
        .collect();
    let q_u: Vec<Complex<T>> = (0..nq)
        .flat_map(|i| (0..nu).map(move |ku| (i, ku)))
        .map(|(i, ku)| phase(two * g.q(i) * u_at(ku)))
        .collect();
    let qp: Vec<Complex<T>> = (0..g.len()).map(|k| phase(two * g.q(k / np) * g.p(k % np))).collect();

    // first pass: G_mn(i₂, v) = Σ_{j₂} w p₂ⁿ fb e^{2i p₂ v}
    let first: Vec<Vec<Complex<T>>> = moments
        .par_iter()
        .map(|&(_, n)| {
            let mut out = vec![real(T::zero()); nq * nv];
            for i2 in 0..nq {
                for j2 in 0..np {
                    let w = wq[i2] * wp[j2] * g.p(j2).powi(n);
                    let b = fb.values[g.index(i2, j2)] * w;
                    if b.re == T::zero() && b.im == T::zero() {
                        continue;
                    }
                    let row = &p_v[j2 * nv..(j2 + 1) * nv];
                    for (o, e) in out[i2 * nv..(i2 + 1) * nv].iter_mut().zip(row) {
                        *o += b * *e;
                    }
                }
            }
            out
        })
        .collect();

    // second pass: H(u, v) = Σ_mn c_mn(u, v) Σ_{i₂} q₂ᵐ e^{2i q₂ u} G_mn(i₂, v),
    // stored as h[kv][ku] so the outer sum reads it contiguously
    let h: Vec<Complex<T>> = (0..nv * nu)
        .into_par_iter()
        .map(|k| {
            let (kv, ku) = (k / nu, k % nu);
            let coeffs = mu_polynomial(-v_at(kv), u_at(ku));
            let mut total = real(T::zero());
            for (slot, &(m, _)) in moments.iter().enumerate() {
                let mut acc = real(T::zero());
                for i2 in 0..nq {
                    acc += first[slot][i2 * nv + kv] * q_u[i2 * nu + ku] * g.q(i2).powi(m);
                }
                // (μ − 1)² enters with weight λ²/192 next to the bare kernel
                let c = corr * coeffs[slot];
                total += acc * if slot == 0 { T::one() + c } else { c };
            }
            total
        })
        .collect();

    // outer sum: S(q, p) = π⁻² Σ_{x₁} w fa e^{2i(q p₁ − q₁ p)} H(p − p₁, q₁ − q)
    let inv_pi2 = T::one() / (T::PI() * T::PI());
    let rows: Vec<Vec<Complex<T>>> = (0..nq)
        .into_par_iter()
        .map(|i| {
            // fa(x₁) w(p₁) e^{2i q p₁} for this output row
            let b: Vec<Complex<T>> = (0..g.len())
                .map(|k1| fa.values[k1] * qp[i * np + k1 % np] * wp[k1 % np])
                .collect();
            (0..np)
                .map(|j| {
                    let mut row_sums = Vec::with_capacity(nq);
                    for i1 in 0..nq {
                        let kv = i1 + nq - 1 - i;
                        let hrow = &h[kv * nu..(kv + 1) * nu];
                        let mut acc = real(T::zero());
                        for j1 in 0..np {
                            acc += b[i1 * np + j1] * hrow[j + np - 1 - j1];
                        }
                        row_sums.push(acc * qp[i1 * np + j].conj() * wq[i1]);
                    }
                    crate::scalar::pairwise_sum(&row_sums) * inv_pi2
                })
                .collect()
        })
        .collect();
    let values: Vec<Complex<T>> = rows.into_iter().flatten().collect();
    SymbolField::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{self, FockOperator};
    use crate::scalar::cplx;

    fn small_grid() -> PhaseGrid<f64> {
        PhaseGrid::square(4.5, 61).unwrap()
    }

    fn vacuum_symbol(g: PhaseGrid<f64>) -> SymbolField<f64> {
        SymbolField::from_fn(g, |x| cplx(2.0 * (-(x.q * x.q + x.p * x.p)).exp(), 0.0)).unwrap()
    }

    fn coherent_symbol(g: PhaseGrid<f64>, beta: Complex<f64>) -> SymbolField<f64> {
        // Wigner function of |β⟩⟨β| with β = (q₀ + i p₀)/√2
        let (q0, p0) = (beta.re * 2f64.sqrt(), beta.im * 2f64.sqrt());
        SymbolField::from_fn(g, |x| {
            cplx(2.0 * (-((x.q - q0).powi(2) + (x.p - p0).powi(2))).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn mu_polynomial_matches_direct_square() {
        let (a, b) = (0.7, -0.4);
        let c = mu_polynomial(a, b);
        for &(q2, p2) in &[(0.3, 0.2), (-1.1, 0.5), (2.0, -1.5)] {
            let mu: f64 = (a - q2) * (a - q2) + (b - p2) * (b - p2);
            let direct = (mu - 1.0) * (mu - 1.0);
            let poly: f64 = MOMENTS
                .iter()
                .zip(c.iter())
                .map(|(&(m, n), k)| k * f64::powi(q2, m) * f64::powi(p2, n))
                .sum();
            assert!((direct - poly).abs() < 1e-12, "{direct} vs {poly}");
        }
    }

    #[test]
    fn separable_sum_matches_direct_double_sum_on_tiny_grid() {
        use crate::kernels::{groenewold_analytic, lambda_kernel_analytic};
        let g = PhaseGrid::square(1.5, 7).unwrap();
        let fa = coherent_symbol(g, cplx(0.2, 0.1));
        let fb = SymbolField::from_fn(g, |x| cplx((-(x.q * x.q) - 0.5 * x.p * x.p).exp(), 0.3 * x.q)).unwrap();
        for lambda in [0.0, 0.4] {
            let kind = if lambda == 0.0 {
                KernelKind::Groenewold
            } else {
                KernelKind::FDeformed {
                    f: NonlinearityFunction::q_quadratic(lambda),
                }
            };
            let cfg = StarConfig::new(Route::KernelQuadrature, kind, g, 16);
            let fast = kernel_star(&fa, &fb, &cfg).unwrap();
            for k in 0..g.len() {
                let x = g.point_at(k);
                let mut direct = cplx(0.0, 0.0);
                for k1 in 0..g.len() {
                    for k2 in 0..g.len() {
                        let (x1, x2) = (g.point_at(k1), g.point_at(k2));
                        let w = g.weight(k1 / g.np, k1 % g.np) * g.weight(k2 / g.np, k2 % g.np);
                        let kern = if lambda == 0.0 {
                            groenewold_analytic(x1, x2, x).value
                        } else {
                            lambda_kernel_analytic(lambda, x1, x2, x).value
                        };
                        direct += fa.values[k1] * fb.values[k2] * kern * w;
                    }
                }
                assert!((fast.values[k] - direct).norm() < 1e-12, "point {k}");
            }
        }
    }

    #[test]
    fn vacuum_is_idempotent_on_both_routes() {
        let g = small_grid();
        let w0 = vacuum_symbol(g);
        for route in [Route::KernelQuadrature, Route::Operator] {
            let cfg = StarConfig::new(route, KernelKind::Groenewold, g, 48);
            let s = star(&w0, &w0, &cfg).unwrap();
            let err = s.max_abs_diff_interior_half(&w0).unwrap();
            assert!(err < 1e-3, "{route:?}: {err}");
        }
    }

    #[test]
    fn identity_is_a_left_unit_on_the_operator_route() {
        let g = PhaseGrid::square(5.0, 101).unwrap();
        let cfg = StarConfig::new(Route::Operator, KernelKind::Groenewold, g, 64);
        let fb = coherent_symbol(g, cplx(0.3, -0.2));
        let b = reconstruct(&fb, &cfg).unwrap();
        let s = star_operators(&FockOperator::identity(64).unwrap(), &b, &cfg).unwrap();
        assert!(s.max_abs_diff(&fb).unwrap() < 1e-3);
    }

    #[test]
    fn identity_deformation_is_bitwise_groenewold_on_operator_route() {
        let g = PhaseGrid::square(2.0, 11).unwrap();
        let a = FockOperator::coherent_projector(cplx(0.5, 0.0), 32).unwrap();
        let b = FockOperator::coherent_projector(cplx(-0.3, 0.4), 32).unwrap();
        let plain = star_operators(&a, &b, &StarConfig::new(Route::Operator, KernelKind::Groenewold, g, 32)).unwrap();
        let deformed = star_operators(
            &a,
            &b,
            &StarConfig::new(
                Route::Operator,
                KernelKind::FDeformed {
                    f: NonlinearityFunction::Identity,
                },
                g,
                32,
            ),
        )
        .unwrap();
        assert_eq!(plain.values, deformed.values);
    }

    #[test]
    fn bracket_of_field_with_itself_vanishes() {
        let g = small_grid();
        let f = coherent_symbol(g, cplx(0.4, 0.2));
        for route in [Route::KernelQuadrature, Route::Operator] {
            let cfg = StarConfig::new(route, KernelKind::Groenewold, g, 32);
            let b = moyal_bracket(&f, &f, &cfg).unwrap();
            assert_eq!(b.max_abs(), 0.0, "{route:?}");
        }
    }

    #[test]
    fn position_momentum_bracket_is_i() {
        let g = PhaseGrid::square(1.0, 5).unwrap();
        let dim = 200;
        let cfg =
            StarConfig::new(Route::Operator, KernelKind::Groenewold, g, dim).with_schedule(DampingSchedule::precise());
        let q = fock::position_operator::<f64>(dim + 1).unwrap();
        let p = fock::momentum_operator::<f64>(dim + 1).unwrap();
        let b = moyal_bracket_operators(&q, &p, &cfg).unwrap();
        for v in &b.values {
            assert!((v - cplx(0.0, 1.0)).norm() < 1e-6, "{v}");
        }
        assert!(b.warnings.is_empty(), "{:?}", b.warnings);
    }

    #[test]
    fn quadratic_deformation_at_zero_lambda_is_undeformed() {
        let g = PhaseGrid::square(1.0, 5).unwrap();
        let a = FockOperator::coherent_projector(cplx(0.5, 0.0), 24).unwrap();
        let b = FockOperator::coherent_projector(cplx(0.1, 0.4), 24).unwrap();
        let plain =
            moyal_bracket_operators(&a, &b, &StarConfig::new(Route::Operator, KernelKind::Groenewold, g, 24)).unwrap();
        let zero = moyal_bracket_operators(
            &a,
            &b,
            &StarConfig::new(
                Route::Operator,
                KernelKind::FDeformed {
                    f: NonlinearityFunction::q_quadratic(0.0),
                },
                g,
                24,
            ),
        )
        .unwrap();
        assert_eq!(plain.values, zero.values);
    }

    #[test]
    fn contract_and_shape_errors() {
        let g = small_grid();
        let flat = SymbolField::from_fn(g, |_| cplx(1.0, 0.0)).unwrap();
        let w0 = vacuum_symbol(g);
        let cfg = StarConfig::new(Route::KernelQuadrature, KernelKind::Groenewold, g, 32);
        assert!(matches!(star(&flat, &w0, &cfg), Err(Error::Contract(_))));
        let other = vacuum_symbol(PhaseGrid::square(4.0, 61).unwrap());
        assert!(matches!(star(&other, &w0, &cfg), Err(Error::ShapeMismatch { .. })));
        let table = StarConfig::new(
            Route::KernelQuadrature,
            KernelKind::FDeformed {
                f: NonlinearityFunction::Table { values: vec![1.0; 40] },
            },
            g,
            32,
        );
        assert!(matches!(star(&w0, &w0, &table), Err(Error::Unsupported(_))));
    }
}
