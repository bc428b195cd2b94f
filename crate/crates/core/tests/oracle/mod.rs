//! Closed-form reference values, written out independently of the library.

#![allow(dead_code)]

use moyal_core::{Complex64 as C, PhasePoint64 as Pt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub const SEED: u64 = 20240101;

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

pub fn random_point(r: &mut ChaCha8Rng, extent: f64) -> Pt {
    Pt::new(r.gen_range(-extent..=extent), r.gen_range(-extent..=extent)).unwrap()
}

pub fn random_triple(r: &mut ChaCha8Rng, extent: f64) -> (Pt, Pt, Pt) {
    (
        random_point(r, extent),
        random_point(r, extent),
        random_point(r, extent),
    )
}

/// Symplectic form `ω(a, b) = a_q b_p − a_p b_q`.
fn omega(a: Pt, b: Pt) -> f64 {
    a.q * b.p - a.p * b.q
}

/// Groenewold kernel as `π⁻² exp(2i[ω(x, x₁) + ω(x₁, x₂) + ω(x₂, x)])`,
/// i.e. four times the oriented area of the triangle.
pub fn groenewold(x1: Pt, x2: Pt, x: Pt) -> C {
    C::from_polar(1.0 / (PI * PI), 2.0 * (omega(x, x1) + omega(x1, x2) + omega(x2, x)))
}

fn amp(x: Pt) -> C {
    // 2α = √2 (q + i p)
    C::new(x.q, x.p) * 2f64.sqrt()
}

/// `Tr[D̂(x₁) e^{iτ a†a} D̂(x₂) Û(x)]` in closed form, obtained from the
/// Gaussian integral representation of displacements:
/// `(2/π²) e^{iΦ₀} e^{iΦ₁} e^{i|γ|² tan(τ/2)/2} / (1 + e^{iτ})`
/// with `γ = 2α₁ + (2α − 2α₂)e^{iτ}`.
pub fn tau_kernel(tau: f64, x1: Pt, x2: Pt, x: Pt) -> C {
    let (a1, a2, a) = (amp(x1), amp(x2), amp(x));
    let e = C::from_polar(1.0, tau);
    let shifted = (a - a2) * e;
    let gamma = a1 + shifted;
    let phi0 = (-a2 * a.conj()).im;
    let phi1 = (a1 * shifted.conj()).im;
    let gauss = gamma.norm_sqr() * (tau / 2.0).tan() / 2.0;
    C::from_polar(2.0 / (PI * PI), phi0 + phi1 + gauss) / (C::new(1.0, 0.0) + e)
}

/// `Tr[D̂₁ n² D̂₂ Û] / Tr[D̂₁ D̂₂ Û]` from the second τ-derivative of
/// [`tau_kernel`] at 0 (central difference on the closed form).
pub fn n_squared_ratio(x1: Pt, x2: Pt, x: Pt) -> C {
    let h = 1e-3;
    let k0 = tau_kernel(0.0, x1, x2, x);
    -(tau_kernel(h, x1, x2, x) - k0 * 2.0 + tau_kernel(-h, x1, x2, x)) / (h * h) / k0
}

pub fn mu(x1: Pt, x2: Pt, x: Pt) -> f64 {
    (x.q - x1.q - x2.q).powi(2) + (x.p - x1.p - x2.p).powi(2)
}

/// Wigner function of the coherent state `|β⟩`, `β = (q₀ + i p₀)/√2`.
pub fn coherent_wigner(beta: C, x: Pt) -> f64 {
    let (q0, p0) = (beta.re * 2f64.sqrt(), beta.im * 2f64.sqrt());
    2.0 * (-(x.q - q0).powi(2) - (x.p - p0).powi(2)).exp()
}

/// Wigner function of `|1⟩`: `2(2r² − 1)e^{−r²}`.
pub fn first_excited_wigner(x: Pt) -> f64 {
    let r2 = x.q * x.q + x.p * x.p;
    2.0 * (2.0 * r2 - 1.0) * (-r2).exp()
}

/// q-oscillator `f(n) = √(sinh(λn)/(λn))`.
pub fn q_exact(lambda: f64, n: usize) -> f64 {
    let x = lambda * n as f64;
    if x == 0.0 {
        1.0
    } else {
        (x.sinh() / x).sqrt()
    }
}

pub fn q_quadratic(lambda: f64, n: usize) -> f64 {
    let n = n as f64;
    1.0 + lambda * lambda * n * n / 12.0
}
