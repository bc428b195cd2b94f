//! Numerics for phase-space quantum mechanics on a single bosonic mode.
//!
//! Operators live in a truncated number basis ([`fock`]), phase-space
//! functions are Weyl symbols ([`weyl`]), and star products are evaluated
//! either through three-point integral kernels ([`kernels`], [`starcalc`])
//! or by multiplying operators and mapping back. Nonlinear oscillator
//! deformations ([`foscillator`]) enter as diagonal insertions, which is the
//! same thing as a K-deformed matrix product ([`kproduct`]).
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what the CLI and the acceptance suite use.

// index loops read closer to the formulas in dense kernels
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fock;
pub mod foscillator;
pub mod io;
pub mod kernels;
pub mod kproduct;
mod linalg;
pub mod scalar;
pub mod starcalc;
pub mod tolerances;
pub mod weyl;

/// Crate version, recorded in CLI provenance files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use scalar::Real;

pub use fock::{DampedTrace, DampingSchedule, FockOperator};
pub use foscillator::{AmplitudeState, NonlinearityFunction};
pub use kernels::{DeformationReport, KernelSample, StructureKind, StructureSample};
pub use kproduct::{KContext, TwoPointKernel};
pub use starcalc::{KernelKind, Route, StarConfig};
pub use weyl::{PhaseGrid, PhasePoint, SymbolField};

pub type FockOperator64 = FockOperator<f64>;
pub type FockOperator32 = FockOperator<f32>;
pub type DampingSchedule64 = DampingSchedule<f64>;
pub type PhasePoint64 = PhasePoint<f64>;
pub type PhaseGrid64 = PhaseGrid<f64>;
pub type SymbolField64 = SymbolField<f64>;
pub type KernelSample64 = KernelSample<f64>;
pub type KContext64 = KContext<f64>;
pub type NonlinearityFunction64 = NonlinearityFunction<f64>;
pub type StarConfig64 = StarConfig<f64>;
pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
