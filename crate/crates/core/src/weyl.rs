//! Weyl correspondence: quantizer/dequantizer pair, symbol maps in both
//! directions, and Wigner functions.
//!
//! Conventions (ħ = 1): `α = (q + ip)/√2`, quantizer `Û(x) = 2·T(2α)·Π`
//! with `Π` the parity operator, dequantizer `D̂(x) = Û(x)/2π`, and the
//! reconstruction integral uses the plain measure `dq dp`. With these,
//! `(1/2π)∬ f_A dq dp = Tr A` and Wigner functions integrate to `2π`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, damped_sum, parity_diagonal, DampingSchedule, FockOperator};
use crate::scalar::{pairwise_sum, real, Real};
use crate::tolerances;

/// Point of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    pub q: T,
    pub p: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(q: T, p: T) -> Result<Self> {
        if !(q.is_finite() && p.is_finite()) {
            return Err(Error::NonFinite(format!("phase point ({q}, {p})")));
        }
        Ok(Self { q, p })
    }

    pub fn origin() -> Self {
        Self {
            q: T::zero(),
            p: T::zero(),
        }
    }

    /// Complex amplitude `(q + ip)/√2`.
    pub fn alpha(&self) -> Complex<T> {
        Complex::new(self.q, self.p) / T::SQRT_2()
    }

    pub fn from_alpha(alpha: Complex<T>) -> Result<Self> {
        Self::new(alpha.re * T::SQRT_2(), alpha.im * T::SQRT_2())
    }

    pub fn offset(&self, other: &Self) -> Self {
        Self {
            q: self.q + other.q,
            p: self.p + other.p,
        }
    }
}

/// Uniform rectangular sampling of phase space. Row-major: `q` selects the
/// row, `p` the column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid<T> {
    pub q_min: T,
    pub q_max: T,
    pub p_min: T,
    pub p_max: T,
    pub nq: usize,
    pub np: usize,
}

impl<T: Real> PhaseGrid<T> {
    pub fn new(q_min: T, q_max: T, p_min: T, p_max: T, nq: usize, np: usize) -> Result<Self> {
        let g = Self {
            q_min,
            q_max,
            p_min,
            p_max,
            nq,
            np,
        };
        g.validate()?;
        Ok(g)
    }

    /// `[−extent, extent]²` with `n` samples per axis.
    pub fn square(extent: T, n: usize) -> Result<Self> {
        Self::new(-extent, extent, -extent, extent, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.q_min, self.q_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Grid("non-finite bounds".into()));
        }
        if !(self.q_min < self.q_max && self.p_min < self.p_max) {
            return Err(Error::Grid("bounds must satisfy min < max".into()));
        }
        if self.nq < 2 || self.np < 2 {
            return Err(Error::Grid("need at least two samples per axis".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dq(&self) -> T {
        (self.q_max - self.q_min) / T::from_index(self.nq - 1)
    }

    pub fn dp(&self) -> T {
        (self.p_max - self.p_min) / T::from_index(self.np - 1)
    }

    pub fn q(&self, i: usize) -> T {
        self.q_min + self.dq() * T::from_index(i)
    }

    pub fn p(&self, j: usize) -> T {
        self.p_min + self.dp() * T::from_index(j)
    }

    pub fn point(&self, i: usize, j: usize) -> PhasePoint<T> {
        PhasePoint {
            q: self.q(i),
            p: self.p(j),
        }
    }

    pub fn point_at(&self, k: usize) -> PhasePoint<T> {
        self.point(k / self.np, k % self.np)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }

    fn axis_weight(i: usize, n: usize, h: T) -> T {
        if i == 0 || i == n - 1 {
            h / T::lit(2.0)
        } else {
            h
        }
    }

    /// Trapezoidal weight of sample `(i, j)` for the measure `dq dp`.
    pub fn weight(&self, i: usize, j: usize) -> T {
        Self::axis_weight(i, self.nq, self.dq()) * Self::axis_weight(j, self.np, self.dp())
    }

    pub fn q_weights(&self) -> Vec<T> {
        (0..self.nq).map(|i| Self::axis_weight(i, self.nq, self.dq())).collect()
    }

    pub fn p_weights(&self) -> Vec<T> {
        (0..self.np).map(|j| Self::axis_weight(j, self.np, self.dp())).collect()
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nq - 1 || j == self.np - 1
    }

    /// Sample lies in the central half of both axes.
    pub fn in_interior_half(&self, i: usize, j: usize) -> bool {
        let quarter_q = (self.q_max - self.q_min) / T::lit(4.0);
        let quarter_p = (self.p_max - self.p_min) / T::lit(4.0);
        let (q, p) = (self.q(i), self.p(j));
        let slack = T::lit(1e-9);
        q >= self.q_min + quarter_q - slack
            && q <= self.q_max - quarter_q + slack
            && p >= self.p_min + quarter_p - slack
            && p <= self.p_max - quarter_p + slack
    }

    /// Largest `|2α|² = 2(q² + p²)` reached on the grid.
    pub fn max_displacement_sqr(&self) -> T {
        let q = self.q_min.abs().max(self.q_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        T::lit(2.0) * (q * q + p * p)
    }

    pub fn same_as(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::shape(format!("{self:?}"), format!("{other:?}")));
        }
        Ok(())
    }
}

impl<T: Real> Default for PhaseGrid<T> {
    fn default() -> Self {
        Self::square(T::lit(6.0), 121).expect("static grid is valid")
    }
}

/// Complex samples of a phase-space function on a [`PhaseGrid`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolField<T> {
    pub grid: PhaseGrid<T>,
    /// Row-major samples, `values[grid.index(i, j)]`.
    pub values: Vec<Complex<T>>,
    /// Per-point validity; `false` where the trace was not finite.
    pub mask: Vec<bool>,
    pub real_valued: bool,
    pub real_tolerance: T,
    /// `(1/2π)∬ f dq dp`, filled in for Wigner functions.
    pub normalization: Option<T>,
    /// Largest extrapolation error estimate over the grid, if computed.
    pub max_error_estimate: Option<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> SymbolField<T> {
    pub fn new(grid: PhaseGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::shape(
                format!("{}x{} grid", grid.nq, grid.np),
                format!("{} values", values.len()),
            ));
        }
        let mask = values.iter().map(|z| z.re.is_finite() && z.im.is_finite()).collect();
        Ok(Self {
            grid,
            values,
            mask,
            real_valued: false,
            real_tolerance: T::lit(tolerances::REAL_VALUED),
            normalization: None,
            max_error_estimate: None,
            warnings: Vec::new(),
        })
    }

    pub fn from_fn(grid: PhaseGrid<T>, f: impl Fn(PhasePoint<T>) -> Complex<T>) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.point_at(k))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: PhaseGrid<T>) -> Result<Self> {
        Self::new(grid, vec![real(T::zero()); grid.len()])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_imag(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.im.abs()))
    }

    pub fn max_real(&self) -> T {
        self.values.iter().fold(T::zero(), |m, z| m.max(z.re.abs()))
    }

    /// Checks the imaginary parts and sets `real_valued` accordingly.
    pub fn mark_real_if_within(&mut self, tol: T) -> bool {
        self.real_tolerance = tol;
        self.real_valued = self.max_imag() <= tol;
        self.real_valued
    }

    fn boundary_and_interior_max(&self) -> (T, T) {
        let g = &self.grid;
        let mut boundary = T::zero();
        let mut interior = T::zero();
        for i in 0..g.nq {
            for j in 0..g.np {
                let v = self.get(i, j).norm();
                if g.is_boundary(i, j) {
                    boundary = boundary.max(v);
                } else {
                    interior = interior.max(v);
                }
            }
        }
        (boundary, interior)
    }

    /// Boundary magnitude is below `10⁻⁴` of the interior maximum.
    pub fn decays_at_boundary(&self) -> bool {
        let (b, i) = self.boundary_and_interior_max();
        b <= T::lit(tolerances::BOUNDARY_DECAY) * i
    }

    /// Trapezoidal `∬ f dq dp`, summed pairwise in row-major order.
    pub fn integral(&self) -> Complex<T> {
        let g = &self.grid;
        let (wq, wp) = (g.q_weights(), g.p_weights());
        let weighted: Vec<Complex<T>> = (0..g.nq)
            .flat_map(|i| {
                let wq_i = wq[i];
                let wp = &wp;
                (0..g.np).map(move |j| self.values[g.index(i, j)] * (wq_i * wp[j]))
            })
            .collect();
        pairwise_sum(&weighted)
    }

    /// `(1/2π)∬ f dq dp`, the trace of the operator this field is the symbol of.
    pub fn trace_integral(&self) -> Complex<T> {
        self.integral() / (T::lit(2.0) * T::PI())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: Complex<T>) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|z| *z * s).collect())
    }

    /// Largest `|self − other|` over samples accepted by `keep(i, j)`.
    pub fn max_abs_diff_where(&self, other: &Self, keep: impl Fn(usize, usize) -> bool) -> Result<T> {
        self.grid.same_as(&other.grid)?;
        let g = &self.grid;
        let mut worst = T::zero();
        for i in 0..g.nq {
            for j in 0..g.np {
                if keep(i, j) {
                    let k = g.index(i, j);
                    worst = worst.max((self.values[k] - other.values[k]).norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.max_abs_diff_where(other, |_, _| true)
    }

    pub fn max_abs_diff_interior_half(&self, other: &Self) -> Result<T> {
        let g = self.grid;
        self.max_abs_diff_where(other, |i, j| g.in_interior_half(i, j))
    }
}

/// `Û(x) = 2·T(2α)·Π`
pub fn quantizer<T: Real>(x: PhasePoint<T>, dim: usize) -> Result<FockOperator<T>> {
    let t = fock::displacement(x.alpha() * T::lit(2.0), dim)?;
    Ok(t.right_diagonal(&parity_diagonal(dim))?.scale_real(T::lit(2.0)))
}

/// `D̂(x) = Û(x)/2π`
pub fn dequantizer<T: Real>(x: PhasePoint<T>, dim: usize) -> Result<FockOperator<T>> {
    Ok(quantizer(x, dim)?.scale_real(T::one() / (T::lit(2.0) * T::PI())))
}

/// Diagonal of `Û(x)·A` from the displacement `T(2α)`.
fn quantizer_product_diagonal<T: Real>(shift: &FockOperator<T>, a: &FockOperator<T>) -> Vec<Complex<T>> {
    let dim = a.dim();
    let two = T::lit(2.0);
    (0..dim)
        .map(|n| {
            let row = shift.row(n);
            let mut acc = real(T::zero());
            for (k, t) in row.iter().enumerate() {
                let term = *t * a.get(k, n);
                if k % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc * two
        })
        .collect()
}

/// Weyl symbol `f_A(x) = Tr[Û(x) A]`, regularized with `schedule`.
pub fn symbol_of<T: Real>(
    a: &FockOperator<T>,
    grid: &PhaseGrid<T>,
    schedule: &DampingSchedule<T>,
) -> Result<SymbolField<T>> {
    grid.validate()?;
    schedule.validate()?;
    let dim = a.dim();
    let two = T::lit(2.0);
    let samples: Vec<Result<(Complex<T>, T, bool)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point_at(k);
            let shift = fock::displacement(x.alpha() * two, dim)?;
            let diag = quantizer_product_diagonal(&shift, a);
            match damped_sum(&diag, schedule) {
                Ok(t) => Ok((t.value, t.error_estimate, t.converged)),
                Err(Error::NonFinite(_)) => Ok((Complex::new(T::nan(), T::nan()), T::nan(), false)),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut values = Vec::with_capacity(grid.len());
    let mut max_err = T::zero();
    let mut unconverged = 0usize;
    for s in samples {
        let (v, err, ok) = s?;
        values.push(v);
        if err.is_finite() {
            max_err = max_err.max(err);
        }
        if !ok {
            unconverged += 1;
        }
    }
    let mut field = SymbolField::new(*grid, values)?;
    field.max_error_estimate = Some(max_err);
    let invalid = field.mask.iter().filter(|m| !**m).count();
    if invalid > 0 {
        field
            .warnings
            .push(format!("{invalid} grid points produced a non-finite trace"));
    }
    if unconverged > 0 {
        field
            .warnings
            .push(format!("{unconverged} grid points did not converge under damping"));
    }
    let upper = dim / 2;
    let reach = grid.max_displacement_sqr() + T::from_index(tolerances::TRUNCATION_BUFFER);
    if reach >= T::from_index(dim) && a.weight_above(upper) > T::lit(1e-10) * a.max_abs() {
        field.warnings.push(format!(
            "grid reaches |2α|² = {} but the operator has weight above level {upper} of {dim}",
            grid.max_displacement_sqr()
        ));
    }
    if a.is_hermitian(T::lit(tolerances::HERMITIAN)) && !field.mark_real_if_within(T::lit(tolerances::REAL_VALUED)) {
        field.warnings.push(format!(
            "Hermitian operator but max |Im| = {} on the grid",
            field.max_imag()
        ));
    }
    Ok(field)
}

/// Operator reconstructed from a symbol together with the quadrature checks.
#[derive(Clone, Debug)]
pub struct Reconstruction<T> {
    pub operator: FockOperator<T>,
    /// Field magnitude at the grid boundary is negligible.
    pub decaying: bool,
    /// Grid spacing exceeds `π/√(2·dim)`.
    pub aliasing: bool,
}

impl<T: Real> Reconstruction<T> {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.decaying {
            w.push("symbol does not decay at the grid boundary".to_string());
        }
        if self.aliasing {
            w.push("grid spacing too coarse for the truncation dimension".to_string());
        }
        w
    }
}

/// `A_f = ∬ f(x) D̂(x) dq dp` by trapezoidal quadrature.
///
/// Rows of the grid are accumulated in parallel and summed in row order, so
/// the result does not depend on scheduling.
pub fn operator_of<T: Real>(f: &SymbolField<T>, dim: usize) -> Result<Reconstruction<T>> {
    let g = f.grid;
    let (wq, wp) = (g.q_weights(), g.p_weights());
    let norm = T::one() / (T::lit(2.0) * T::PI());
    let rows: Vec<Result<FockOperator<T>>> = (0..g.nq)
        .into_par_iter()
        .map(|i| {
            let mut acc = FockOperator::<T>::zeros(dim)?;
            for j in 0..g.np {
                let v = f.values[g.index(i, j)];
                if v.re == T::zero() && v.im == T::zero() {
                    continue;
                }
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite(format!("symbol sample ({i}, {j})")));
                }
                let coeff = v * (wq[i] * wp[j] * norm);
                // Û(x) = 2 T(2α) Π, accumulated without forming the product
                let shift = fock::displacement(g.point(i, j).alpha() * T::lit(2.0), dim)?;
                let c2 = coeff * T::lit(2.0);
                for m in 0..dim {
                    let row = shift.row(m);
                    for (n, t) in row.iter().enumerate() {
                        let term = *t * c2;
                        let cur = acc.get(m, n);
                        acc.set(m, n, if n % 2 == 0 { cur + term } else { cur - term });
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = FockOperator::zeros(dim)?;
    for r in rows {
        total = total.add(&r?)?;
    }
    let spacing = g.dq().max(g.dp());
    let limit = T::PI() / (T::lit(2.0) * T::from_index(dim)).sqrt();
    Ok(Reconstruction {
        operator: total,
        decaying: f.decays_at_boundary(),
        aliasing: spacing > limit,
    })
}

/// Validation thresholds for [`wigner`].
#[derive(Clone, Copy, Debug)]
pub struct StateTolerances<T> {
    pub hermitian: T,
    pub unit_trace: T,
}

impl<T: Real> Default for StateTolerances<T> {
    fn default() -> Self {
        Self {
            hermitian: T::lit(tolerances::HERMITIAN),
            unit_trace: T::lit(tolerances::UNIT_TRACE),
        }
    }
}

/// Wigner function `W(x) = 2 Tr[ρ T(2α) Π]` with its normalization.
pub fn wigner<T: Real>(
    rho: &FockOperator<T>,
    grid: &PhaseGrid<T>,
    schedule: &DampingSchedule<T>,
) -> Result<SymbolField<T>> {
    wigner_with(rho, grid, schedule, StateTolerances::default())
}

pub fn wigner_with<T: Real>(
    rho: &FockOperator<T>,
    grid: &PhaseGrid<T>,
    schedule: &DampingSchedule<T>,
    tol: StateTolerances<T>,
) -> Result<SymbolField<T>> {
    let mut violations = Vec::new();
    let herm = rho.hermiticity_defect();
    if herm > tol.hermitian {
        violations.push(format!("not Hermitian: max |ρ − ρ†| = {herm:e}"));
    }
    let tr = fock::damped_trace(rho, schedule)?.value;
    if (tr - real(T::one())).norm() > tol.unit_trace {
        violations.push(format!("trace {} + {}i differs from 1", tr.re, tr.im));
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let mut field = symbol_of(rho, grid, schedule)?;
    field.mark_real_if_within(T::lit(tolerances::REAL_VALUED));
    field.normalization = Some(field.trace_integral().re);
    Ok(field)
}
