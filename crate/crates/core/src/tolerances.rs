//! Fixed thresholds shared across modules. Most public operations accept an
//! override; these are the defaults.

/// Self-adjointness check for quantizers and density operators.
pub const HERMITIAN: f64 = 1e-10;

/// Unit-trace check for density operators.
pub const UNIT_TRACE: f64 = 1e-6;

/// Largest imaginary part tolerated on a field flagged `real_valued`.
pub const REAL_VALUED: f64 = 1e-6;

/// Relative singular value below which K counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// Smallest eigenvalue K must exceed to count as positive.
pub const MIN_EIGENVALUE: f64 = 1e-12;

/// Off-diagonal tolerance for deformed commutators on interior levels.
pub const COMMUTATOR_DIAGONAL: f64 = 1e-12;

/// A damped trace whose extrapolation error exceeds this fraction of
/// `max(|value|, 1)` is reported as non-convergent.
pub const EXTRAPOLATION_CONVERGED: f64 = 1e-3;

/// `e^{-eps_min * dim}` must be below this for the truncation to be
/// invisible to the damped sum.
pub const DAMPING_TAIL: f64 = 1e-6;

/// Boundary/interior magnitude ratio a field needs to count as decaying.
pub const BOUNDARY_DECAY: f64 = 1e-4;

/// Levels excluded at the top of a truncation in commutator checks.
pub const TRUNCATION_BUFFER: usize = 8;
