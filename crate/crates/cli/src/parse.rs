//! Small text forms used on the command line.

use moyal_core::fock::{self, FockOperator};
use moyal_core::foscillator::{deformed_annihilator, NonlinearityFunction};
use moyal_core::{Complex64, DampingSchedule64, FockOperator64, NonlinearityFunction64};

use crate::error::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number(s: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(usage(format!("not finite: {s:?}")));
    }
    Ok(v)
}

/// `re,im`, or a bare real.
pub fn complex(s: &str) -> CliResult<Complex64> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(number(re)?, number(im)?)),
        None => Ok(Complex64::new(number(s)?, 0.0)),
    }
}

/// `identity`, `q_exact:λ`, `q_quadratic:λ` or `n^k`.
pub fn nonlinearity(s: &str, dim: usize) -> CliResult<NonlinearityFunction64> {
    if s == "identity" {
        return Ok(NonlinearityFunction::Identity);
    }
    if let Some(k) = s.strip_prefix("n^") {
        let k: i32 = k.parse().map_err(|_| usage(format!("bad power in {s:?}")))?;
        return Ok(NonlinearityFunction::number_power(k, dim));
    }
    match s.split_once(':') {
        Some(("q_exact", l)) => Ok(NonlinearityFunction::q_exact(number(l)?)),
        Some(("q_quadratic", l)) => Ok(NonlinearityFunction::q_quadratic(number(l)?)),
        _ => Err(usage(format!(
            "unknown f {s:?}; expected identity, q_exact:λ, q_quadratic:λ or n^k"
        ))),
    }
}

/// Density operator: `vacuum`, `fock:N` or `coherent:re,im`.
pub fn state(s: &str, dim: usize) -> CliResult<FockOperator64> {
    if s == "vacuum" {
        return Ok(FockOperator::number_projector(0, dim)?);
    }
    match s.split_once(':') {
        Some(("fock", n)) => {
            let n: usize = n.parse().map_err(|_| usage(format!("bad level in {s:?}")))?;
            Ok(FockOperator::number_projector(n, dim)?)
        }
        Some(("coherent", b)) => Ok(FockOperator::coherent_projector(complex(b)?, dim)?),
        _ => Err(usage(format!(
            "unknown state {s:?}; expected vacuum, fock:N or coherent:re,im"
        ))),
    }
}

/// Any state form, or one of `identity`, `q`, `p`, `n`, `a`, `adag`,
/// `parity`, `A:<f>` (deformed annihilator).
pub fn operator(s: &str, dim: usize) -> CliResult<FockOperator64> {
    let op = match s {
        "identity" => FockOperator::identity(dim)?,
        "q" => fock::position_operator(dim)?,
        "p" => fock::momentum_operator(dim)?,
        "n" => fock::number_operator(dim)?,
        "a" => fock::annihilator(dim)?,
        "adag" => fock::creator(dim)?,
        "parity" => fock::parity_operator(dim)?,
        _ => match s.strip_prefix("A:") {
            Some(f) => deformed_annihilator(&nonlinearity(f, dim)?, dim)?,
            None => state(s, dim)?,
        },
    };
    Ok(op)
}

/// `ε₁,ε₂,…:order`; the order defaults to one less than the count.
pub fn schedule(s: &str) -> CliResult<DampingSchedule64> {
    let (eps, order) = match s.split_once(':') {
        Some((e, o)) => (
            e,
            Some(o.parse::<usize>().map_err(|_| usage(format!("bad order in {s:?}")))?),
        ),
        None => (s, None),
    };
    let eps: Vec<f64> = eps.split(',').map(number).collect::<CliResult<_>>()?;
    let order = order.unwrap_or(eps.len().saturating_sub(1));
    Ok(DampingSchedule64::new(eps, order)?)
}

/// Short label for a schedule in tables.
pub fn schedule_label(s: &DampingSchedule64) -> String {
    let eps: Vec<String> = s.epsilons().iter().map(|e| e.to_string()).collect();
    format!("{}:{}", eps.join(" "), s.extrapolation_order())
}
