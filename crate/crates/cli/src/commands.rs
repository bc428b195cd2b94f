use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use moyal_core::fock::{self, FockOperator};
use moyal_core::foscillator::{commutator_spectrum, evolve_amplitude_polar, k_context_from_f};
use moyal_core::kernels::{self, Triple};
use moyal_core::kproduct::{k_associativity_defect, k_multiply, sqrt_k_transport};
use moyal_core::starcalc::{self, KernelKind, Route, StarConfig};
use moyal_core::weyl::{symbol_of, wigner};
use moyal_core::{
    io, AmplitudeState, Complex64, DampingSchedule64, Error as CoreError, KContext, KernelSample64,
    NonlinearityFunction, PhasePoint64, SymbolField64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::parse;

/// What a subcommand produced, for the caller to print and record.
#[derive(Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub summary: Value,
}

impl Outcome {
    /// Main result goes to `--out` when given, else to stdout. The summary
    /// is printed only when stdout is free.
    fn emit(&mut self, cfg: &RunConfig, body: &str) -> CliResult<()> {
        match &cfg.out {
            Some(path) => {
                write_file(path, body)?;
                self.outputs.push(path.clone());
                stdout(&(serde_json::to_string_pretty(&self.summary).expect("summary is JSON") + "\n"));
            }
            None => stdout(body),
        }
        Ok(())
    }

    fn emit_field(&mut self, cfg: &RunConfig, field: &SymbolField64) -> CliResult<()> {
        self.warnings.extend(field.warnings.iter().cloned());
        let sidecar = io::SymbolSidecar::of(field);
        let mut summary = serde_json::to_value(&sidecar).expect("sidecar is JSON");
        summary["value_at_origin"] = match origin_index(field) {
            Some(k) => json!([field.values[k].re, field.values[k].im]),
            None => Value::Null,
        };
        self.summary = summary;
        match &cfg.out {
            Some(path) => {
                io::write_symbol_files(field, path).map_err(|e| with_path(e, path))?;
                self.outputs.push(path.clone());
                self.outputs.push(io::sidecar_path(path));
                stdout(&(serde_json::to_string_pretty(&self.summary).expect("summary is JSON") + "\n"));
            }
            None => {
                let mut buf = Vec::new();
                io::write_symbol_csv(field, &mut buf)?;
                stdout(&String::from_utf8(buf).expect("csv is UTF-8"));
            }
        }
        Ok(())
    }
}

/// A closed pipe (`| head`) is not an error worth reporting.
fn stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

fn with_path(e: CoreError, path: &Path) -> CliError {
    match e {
        CoreError::Io(io) => CliError::io(path, io),
        other => other.into(),
    }
}

fn origin_index(field: &SymbolField64) -> Option<usize> {
    let g = field.grid;
    let i = (0..g.nq).find(|&i| g.q(i) == 0.0)?;
    let j = (0..g.np).find(|&j| g.p(j) == 0.0)?;
    Some(g.index(i, j))
}

fn point_label(x1: PhasePoint64, x2: PhasePoint64, x: PhasePoint64) -> String {
    format!("({}, {}; {}, {} → {}, {})", x1.q, x1.p, x2.q, x2.p, x.q, x.p)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct TripleArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p: f64,
}

impl TripleArgs {
    fn triple(&self) -> Triple<f64> {
        Triple {
            q1: self.q1,
            p1: self.p1,
            q2: self.q2,
            p2: self.p2,
            q: self.q,
            p: self.p,
        }
    }
}

/// Where a batch of triples comes from.
#[derive(Args, Clone, Debug, Serialize)]
pub struct BatchArgs {
    /// JSON file `{"triples": [{"q1":…,"p1":…,"q2":…,"p2":…,"q":…,"p":…}]}`
    #[arg(long, conflicts_with = "random")]
    pub triples: Option<PathBuf>,
    /// Seeded random triples with coordinates in [−1, 1]
    #[arg(long)]
    pub random: Option<usize>,
}

impl BatchArgs {
    fn load(&self, cfg: &RunConfig) -> CliResult<Option<Vec<Triple<f64>>>> {
        if let Some(path) = &self.triples {
            let t = io::read_triples(path).map_err(|e| with_path(e, path))?;
            if t.is_empty() {
                return Err(CliError::Usage(format!("{}: no triples", path.display())));
            }
            return Ok(Some(t));
        }
        Ok(self.random.map(|n| random_triples(cfg.seed, n)))
    }
}

fn random_triples(seed: u64, n: usize) -> Vec<Triple<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut c = || r.gen_range(-1.0..=1.0);
            Triple {
                q1: c(),
                p1: c(),
                q2: c(),
                p2: c(),
                q: c(),
                p: c(),
            }
        })
        .collect()
}

// kernel

#[derive(Args, Clone, Debug, Serialize)]
pub struct KernelArgs {
    /// Closed form instead of the regularized trace
    #[arg(long)]
    pub analytic: bool,
    /// Nonlinearity: identity, q_exact:λ, q_quadratic:λ or n^k
    #[arg(long, default_value = "identity")]
    pub f: String,
    #[command(flatten)]
    pub point: TripleArgs,
    #[command(flatten)]
    pub batch: BatchArgs,
}

#[derive(Serialize)]
struct KernelValue {
    re: f64,
    im: f64,
    err: f64,
}

pub fn kernel(a: &KernelArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let sched = cfg.schedule()?;
    let f = parse::nonlinearity(&a.f, cfg.dim)?;
    if a.analytic && matches!(f, NonlinearityFunction::Table { .. }) {
        return Err(CliError::Usage("no closed-form kernel for a tabulated f".into()));
    }
    let eval = |t: &Triple<f64>| -> CliResult<KernelSample64> {
        let (x1, x2, x) = t.points()?;
        Ok(match (&f, a.analytic) {
            (NonlinearityFunction::Identity, true) => kernels::groenewold_analytic(x1, x2, x),
            (_, true) => kernels::lambda_kernel_analytic(f.lambda().unwrap_or(0.0), x1, x2, x),
            (_, false) => kernels::kernel_numeric(&f, x1, x2, x, cfg.dim, &sched)?,
        })
    };
    let batch = a.batch.load(cfg)?;
    let triples = batch.clone().unwrap_or_else(|| vec![a.point.triple()]);
    let samples: Vec<KernelSample64> = triples.par_iter().map(eval).collect::<CliResult<_>>()?;

    let mut out = Outcome::default();
    for s in samples.iter().filter(|s| !s.clean) {
        out.warnings.push(format!(
            "kernel at {} flagged: truncation tail or unconverged extrapolation (error estimate {:e})",
            point_label(s.x1, s.x2, s.x_out),
            s.error_estimate
        ));
    }
    let worst = samples.iter().map(|s| s.error_estimate).fold(0.0, f64::max);
    out.summary = json!({ "triples": samples.len(), "max_error_estimate": worst, "warnings": out.warnings.len() });
    let body = if batch.is_some() {
        let mut buf = Vec::new();
        io::write_kernel_csv(&samples, &mut buf)?;
        String::from_utf8(buf).expect("csv is UTF-8")
    } else {
        let s = &samples[0];
        let v = KernelValue {
            re: s.value.re,
            im: s.value.im,
            err: s.error_estimate,
        };
        out.summary = serde_json::to_value(&v).expect("value is JSON");
        serde_json::to_string(&v).expect("value is JSON") + "\n"
    };
    out.emit(cfg, &body)?;
    Ok(out)
}

// verify-deformation

#[derive(Args, Clone, Debug, Serialize)]
pub struct DeformationArgs {
    #[command(flatten)]
    pub point: TripleArgs,
    #[command(flatten)]
    pub batch: BatchArgs,
}

pub fn verify_deformation(a: &DeformationArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let sched = cfg.schedule()?;
    let triples = a.batch.load(cfg)?.unwrap_or_else(|| vec![a.point.triple()]);
    let results: Vec<_> = triples
        .par_iter()
        .map(|t| {
            let (x1, x2, x) = t.points()?;
            match kernels::deformation_check(x1, x2, x, cfg.dim, &sched) {
                Ok(r) => Ok((*t, Some(r))),
                Err(CoreError::IllConditioned { .. }) => Ok((*t, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<moyal_core::Result<_>>()?;

    let mut out = Outcome::default();
    let mut body = String::from("q1,p1,q2,p2,q,p,mu,r_num_re,r_num_im,r_ana,abs_diff,err,status\n");
    let mut reports = Vec::new();
    for (t, r) in &results {
        let (x1, x2, x) = t.points()?;
        let head = format!("{},{},{},{},{},{}", t.q1, t.p1, t.q2, t.p2, t.q, t.p);
        match r {
            Some(r) => {
                let status = if r.clean { "ok" } else { "not_converged" };
                if !r.clean {
                    out.warnings.push(format!(
                        "ratio at {} not converged (error estimate {:e})",
                        point_label(x1, x2, x),
                        r.error_estimate
                    ));
                }
                writeln!(
                    body,
                    "{head},{},{},{},{},{},{},{status}",
                    r.mu, r.r_num.re, r.r_num.im, r.r_ana, r.abs_diff, r.error_estimate
                )
                .unwrap();
                reports.push(*r);
            }
            None => {
                out.warnings
                    .push(format!("ratio at {} ill-conditioned", point_label(x1, x2, x)));
                writeln!(body, "{head},{},,,,,,ill_conditioned", kernels::mu(x1, x2, x)).unwrap();
            }
        }
    }
    let worst = reports.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let fit = (reports.len() >= 3)
        .then(|| kernels::fit_ratio_quadratic(&reports))
        .transpose()?;
    out.summary = json!({
        "triples": results.len(),
        "evaluated": reports.len(),
        "max_abs_diff": worst,
        "fit": fit,
    });
    out.emit(cfg, &body)?;
    Ok(out)
}

// wigner, symbol

#[derive(Args, Clone, Debug, Serialize)]
pub struct WignerArgs {
    /// vacuum, fock:N or coherent:re,im
    #[arg(long)]
    pub state: String,
}

pub fn wigner_cmd(a: &WignerArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let rho = parse::state(&a.state, cfg.dim)?;
    let field = wigner(&rho, &cfg.grid, &cfg.schedule()?)?;
    let mut out = Outcome::default();
    out.emit_field(cfg, &field)?;
    Ok(out)
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SymbolArgs {
    /// identity, q, p, n, a, adag, parity, A:<f>, or a state
    #[arg(long)]
    pub operator: String,
}

pub fn symbol(a: &SymbolArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let op = parse::operator(&a.operator, cfg.dim)?;
    let field = symbol_of(&op, &cfg.grid, &cfg.schedule()?)?;
    let mut out = Outcome::default();
    out.emit_field(cfg, &field)?;
    Ok(out)
}

// star

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Kernel,
    Operator,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct StarArgs {
    /// Symbol CSV (with its JSON sidecar), `wigner:<state>` or `symbol:<operator>`
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, value_enum, default_value = "operator")]
    pub route: RouteArg,
    /// groenewold, or a nonlinearity for the deformed kernel
    #[arg(long, default_value = "groenewold")]
    pub kernel: String,
    /// Bracket a⋆b − b⋆a instead of the product
    #[arg(long)]
    pub bracket: bool,
}

fn load_symbol(s: &str, cfg: &RunConfig) -> CliResult<SymbolField64> {
    let sched = cfg.schedule()?;
    if let Some(state) = s.strip_prefix("wigner:") {
        return Ok(wigner(&parse::state(state, cfg.dim)?, &cfg.grid, &sched)?);
    }
    if let Some(op) = s.strip_prefix("symbol:") {
        return Ok(symbol_of(&parse::operator(op, cfg.dim)?, &cfg.grid, &sched)?);
    }
    let path = Path::new(s);
    io::read_symbol_files(path).map_err(|e| with_path(e, path))
}

pub fn star(a: &StarArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let fa = load_symbol(&a.a, cfg)?;
    let fb = load_symbol(&a.b, cfg)?;
    let kernel = match a.kernel.as_str() {
        "groenewold" => KernelKind::Groenewold,
        f => KernelKind::FDeformed {
            f: parse::nonlinearity(f, cfg.dim)?,
        },
    };
    let route = match a.route {
        RouteArg::Kernel => Route::KernelQuadrature,
        RouteArg::Operator => Route::Operator,
    };
    let sc = StarConfig::new(route, kernel, fa.grid, cfg.dim).with_schedule(cfg.schedule()?);
    let field = if a.bracket {
        starcalc::moyal_bracket(&fa, &fb, &sc)?
    } else {
        starcalc::star(&fa, &fb, &sc)?
    };
    let mut out = Outcome::default();
    out.emit_field(cfg, &field)?;
    Ok(out)
}

// kproduct

#[derive(Args, Clone, Debug, Serialize)]
pub struct KproductArgs {
    /// Number of random (a, b, c, K) samples
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Matrix size
    #[arg(long, default_value_t = 16)]
    pub size: usize,
    /// Use K = diag f(n) instead of a random positive K
    #[arg(long)]
    pub k_from_f: Option<String>,
}

fn random_matrix(r: &mut ChaCha8Rng, dim: usize) -> CliResult<FockOperator<f64>> {
    Ok(FockOperator::from_fn(dim, |_, _| {
        Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    })?)
}

pub fn kproduct(a: &KproductArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let n = a.size;
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fixed = match &a.k_from_f {
        Some(f) => Some(k_context_from_f(&parse::nonlinearity(f, n)?, n)?),
        None => None,
    };
    let (mut assoc, mut unit, mut homo) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..a.count {
        let (x, y, z) = (
            random_matrix(&mut r, n)?,
            random_matrix(&mut r, n)?,
            random_matrix(&mut r, n)?,
        );
        let ctx = match &fixed {
            Some(c) => c.clone(),
            None => {
                let m = random_matrix(&mut r, n)?;
                let k = m
                    .multiply(&m.adjoint())?
                    .scale_real(1.0 / n as f64)
                    .add(&FockOperator::identity(n)?)?;
                KContext::new(k)?
            }
        };
        let scale = k_multiply(&k_multiply(&x, &y, &ctx)?, &z, &ctx)?
            .max_abs()
            .max(f64::MIN_POSITIVE);
        assoc = assoc.max(k_associativity_defect(&x, &y, &z, &ctx)? / scale);
        if let Ok(e) = ctx.unit() {
            unit = unit
                .max(k_multiply(e, &x, &ctx)?.max_abs_diff(&x)?)
                .max(k_multiply(&x, e, &ctx)?.max_abs_diff(&x)?);
        }
        if ctx.positive() {
            let lhs = sqrt_k_transport(&k_multiply(&x, &y, &ctx)?, &ctx)?;
            let rhs = sqrt_k_transport(&x, &ctx)?.multiply(&sqrt_k_transport(&y, &ctx)?)?;
            homo = homo.max(lhs.max_abs_diff(&rhs)?);
        }
    }
    let mut out = Outcome::default();
    for (name, v, tol) in [
        ("associativity defect", assoc, 1e-12),
        ("unit law", unit, 1e-10),
        ("√K homomorphism", homo, 1e-10),
    ] {
        if v >= tol {
            out.warnings.push(format!("{name} {v:e} exceeds {tol:e}"));
        }
    }
    out.summary = json!({
        "count": a.count,
        "size": n,
        "associativity_relative": assoc,
        "unit_law": unit,
        "homomorphism": homo,
    });
    let body = serde_json::to_string_pretty(&out.summary).expect("summary is JSON") + "\n";
    match &cfg.out {
        Some(path) => {
            write_file(path, &body)?;
            out.outputs.push(path.clone());
        }
        None => stdout(&body),
    }
    Ok(out)
}

// fosc

#[derive(Args, Clone, Debug, Serialize)]
pub struct FoscArgs {
    /// Nonlinearity: identity, q_exact:λ, q_quadratic:λ or n^k
    #[arg(long, default_value = "q_exact:0.1")]
    pub f: String,
    /// Evolve a classical amplitude `re,im` instead of tabulating [A, A†]
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<String>,
    /// χ(I) = c₀ + c₁·I, as `c0,c1`
    #[arg(long, default_value = "1,0", allow_negative_numbers = true)]
    pub chi: String,
    /// Times, comma separated
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,1,2,5,10",
        allow_negative_numbers = true
    )]
    pub times: Vec<f64>,
}

pub fn fosc(a: &FoscArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut body = String::new();
    if let Some(amp) = &a.amplitude {
        let a0 = parse::complex(amp)?;
        let c = parse::complex(&a.chi)?;
        let state = AmplitudeState::new(a0, |i: f64| c.re + c.im * i);
        body.push_str("t,re,im,modulus,phase\n");
        for &t in &a.times {
            let (r, phase) = evolve_amplitude_polar(&state, t);
            let z = Complex64::from_polar(r, phase);
            writeln!(body, "{t},{},{},{r},{phase}", z.re, z.im).unwrap();
        }
        out.summary = json!({ "frequency": state.frequency(), "modulus": a0.norm() });
    } else {
        let f = parse::nonlinearity(&a.f, cfg.dim)?;
        let spectrum = commutator_spectrum(&f, cfg.dim)?;
        body.push_str("n,f,commutator,expected,abs_err\n");
        let mut worst = 0.0f64;
        for (n, c) in spectrum.iter().enumerate() {
            let (f0, f1) = (f.value(n)?, f.value(n + 1)?);
            let expected = (n + 1) as f64 * f1 * f1 - n as f64 * f0 * f0;
            let err = (c - expected).abs();
            worst = worst.max(err);
            writeln!(body, "{n},{f0},{c},{expected},{err}").unwrap();
        }
        if worst > moyal_core::tolerances::COMMUTATOR_DIAGONAL {
            out.warnings.push(format!("commutator diagonal off by {worst:e}"));
        }
        out.summary = json!({ "levels": spectrum.len(), "max_abs_err": worst });
    }
    out.emit(cfg, &body)?;
    Ok(out)
}

// convergence

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Numeric kernel at one triple
    Kernel,
    /// n²-insertion ratio at one triple
    Deformation,
    /// Damped trace of T(γ)·parity
    Parity,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct ConvergenceArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// Truncation dimensions, comma separated; defaults to the configured one
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Damping schedule `ε₁,ε₂,…:order`; repeat for several
    #[arg(long = "schedule")]
    pub schedules: Vec<String>,
    /// Nonlinearity for the kernel target
    #[arg(long, default_value = "identity")]
    pub f: String,
    /// Displacement for the parity target, `re,im`
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub gamma: String,
    #[command(flatten)]
    pub point: TripleArgs,
    /// Plot description; defaults next to `--out`
    #[arg(long)]
    pub plot_spec: Option<PathBuf>,
}

struct Row {
    dim: usize,
    schedule: String,
    value: Complex64,
    err: f64,
    clean: bool,
    diff: Option<f64>,
}

fn evaluate(a: &ConvergenceArgs, dim: usize, sched: &DampingSchedule64) -> CliResult<(Complex64, f64, bool)> {
    let (x1, x2, x) = a.point.triple().points()?;
    Ok(match a.target {
        Target::Kernel => {
            let k = kernels::kernel_numeric(&parse::nonlinearity(&a.f, dim)?, x1, x2, x, dim, sched)?;
            (k.value, k.error_estimate, k.clean)
        }
        Target::Deformation => {
            let r = kernels::deformation_check(x1, x2, x, dim, sched)?;
            (r.r_num, r.error_estimate, r.clean)
        }
        Target::Parity => {
            let op = fock::displacement(parse::complex(&a.gamma)?, dim)?.multiply(&fock::parity_operator(dim)?)?;
            let t = fock::damped_trace(&op, sched)?;
            (t.value, t.error_estimate, t.is_clean())
        }
    })
}

pub fn convergence(a: &ConvergenceArgs, cfg: &RunConfig) -> CliResult<Outcome> {
    let dims = if a.dims.is_empty() {
        vec![cfg.dim]
    } else {
        a.dims.clone()
    };
    let schedules = if a.schedules.is_empty() {
        vec![cfg.schedule()?]
    } else {
        a.schedules
            .iter()
            .map(|s| parse::schedule(s))
            .collect::<CliResult<_>>()?
    };
    let mut out = Outcome::default();
    if dims.len() == 1 {
        out.warnings.push("single dimension: no convergence estimate".into());
    }
    let mut rows = Vec::new();
    let mut non_monotone = false;
    for sched in &schedules {
        let label = parse::schedule_label(sched);
        let values: Vec<_> = dims
            .par_iter()
            .map(|&d| evaluate(a, d, sched))
            .collect::<CliResult<_>>()?;
        let mut prev: Option<(Complex64, Option<f64>)> = None;
        for (&dim, (value, err, clean)) in dims.iter().zip(values) {
            let diff = prev.map(|(p, _)| (value - p).norm() / value.norm().max(f64::MIN_POSITIVE));
            if let (Some(d), Some((_, Some(pd)))) = (diff, prev) {
                if d > pd {
                    non_monotone = true;
                    out.warnings
                        .push(format!("non-monotone convergence at dim {dim} with schedule {label}"));
                }
            }
            if !clean {
                out.warnings.push(format!(
                    "not converged at dim {dim} with schedule {label} (error {err:e})"
                ));
            }
            prev = Some((value, diff));
            rows.push(Row {
                dim,
                schedule: label.clone(),
                value,
                err,
                clean,
                diff,
            });
        }
    }
    let mut body = String::from("dim,schedule,re,im,err,clean,successive_diff\n");
    for r in &rows {
        let diff = r.diff.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            body,
            "{},{},{},{},{},{},{diff}",
            r.dim, r.schedule, r.value.re, r.value.im, r.err, r.clean
        )
        .unwrap();
    }
    out.summary = json!({
        "rows": rows.len(),
        "estimate": dims.len() > 1,
        "non_monotone": non_monotone,
        "final": rows.last().map(|r| [r.value.re, r.value.im]),
    });
    let plot_path = a
        .plot_spec
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| o.with_extension("plot.json")));
    out.emit(cfg, &body)?;
    if let Some(p) = plot_path {
        let data = cfg
            .out
            .as_ref()
            .and_then(|o| o.file_name())
            .map(|n| n.to_string_lossy().into_owned());
        let spec = json!({
            "data": data,
            "mark": "line",
            "x": { "column": "dim", "label": "truncation dimension", "scale": "log" },
            "y": { "column": "successive_diff", "label": "relative successive difference", "scale": "log" },
            "series": { "column": "schedule", "values": schedules.iter().map(parse::schedule_label).collect::<Vec<_>>() },
            "secondary": { "column": "re", "label": "Re value" },
        });
        write_file(
            &p,
            &(serde_json::to_string_pretty(&spec).expect("plot spec is JSON") + "\n"),
        )?;
        out.outputs.push(p);
    }
    Ok(out)
}
