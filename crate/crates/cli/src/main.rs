//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 usage or parse error, 3 infeasible model or start,
//! 4 no convergence, 5 numerical failure. Errors are reported on stderr as a
//! JSON object `{"error", "message", "exit_code"}`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use passive_center::bilinear::transform;
use passive_center::center::{
    compute_analytic_center_with, stationarity_systems, verify_center_spectrum, CenterOptions, CenterResult,
    Damping, InitKind, InitStrategy, IterationRecord, Method, SpectrumReport,
};
use passive_center::io::{complex_value, document_value, matrix_value, number, read_model, to_json_string, ModelDocument};
use passive_center::lmi::stationarity_residual;
use passive_center::model::{random_passive_model, random_passive_model_complex};
use passive_center::radius::{probe_perturbations, x_passivity_bound};
use passive_center::riccati::{riccati_residual, solve_extremal};
use passive_center::{Error, TimeDomain};

#[derive(Parser)]
#[command(name = "passive-center", version, about = "Analytic center of the passivity LMI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the analytic center of the LMI solution set.
    Center {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extremal solutions of the Riccati equation.
    Riccati {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Passivity-radius lower bound at X (from the file, else the center).
    Radius {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Probe margins, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.9, 0.99])]
        margin: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cayley transform into the other time domain.
    Transform {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random strictly passive model with X = I interior.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = DomainArg::Continuous)]
        domain: DomainArg,
        /// Draw complex matrices.
        #[arg(long)]
        complex: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum and stationarity diagnostics at the X stored in the file.
    Check {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Newton)]
    method: MethodArg,
    /// Gradient-norm tolerance, relative to 1 + ‖X‖₂.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_decrement: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = InitArg::Geomean)]
    init: InitArg,
    /// Shift for the shifted-Riccati start.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, value_enum, default_value_t = DampingArg::Decrement)]
    damping: DampingArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Newton,
    Ascent,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Geomean,
    Shifted,
    Identity,
    Given,
}

#[derive(Clone, Copy, ValueEnum)]
enum DampingArg {
    Decrement,
    RootDecrement,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Continuous,
    Discrete,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse { .. } | Error::Io(_) | Error::InvalidArgument(_) | Error::Shape(_) => (2, "parse"),
            Error::InvalidModel(_) | Error::InvalidScalarModel(_) => (2, "parse"),
            Error::NotStrictlyPassive(_) | Error::Boundary { .. } | Error::XiTooLarge { .. } => (3, "infeasible"),
            _ => (5, "numeric"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(args: &SolverArgs, doc: &ModelDocument) -> CliResult<CenterOptions> {
    let mut o = CenterOptions {
        method: match args.method {
            MethodArg::Newton => Method::Newton,
            MethodArg::Ascent => Method::Ascent,
        },
        tol_residual: args.tol,
        tol_decrement: args.tol_decrement,
        damping: match args.damping {
            DampingArg::Decrement => Damping::Decrement,
            DampingArg::RootDecrement => Damping::RootDecrement,
        },
        xi: args.xi,
        ..CenterOptions::default()
    };
    if o.method == Method::Ascent {
        o.max_iter = 5000;
    }
    if let Some(k) = args.max_iter {
        o.max_iter = k;
    }
    o.init = match args.init {
        InitArg::Geomean => InitStrategy::GeometricMean,
        InitArg::Shifted => InitStrategy::ShiftedRiccati,
        InitArg::Identity => InitStrategy::Identity,
        InitArg::Given => InitStrategy::Given(doc.x.clone().ok_or_else(|| Failure {
            code: 2,
            kind: "parse",
            message: "--init given needs an X field in the model file".into(),
        })?),
    };
    o.validate()?;
    Ok(o)
}

fn spectrum_value(s: &SpectrumReport) -> Value {
    json!({
        "metric": number(s.metric),
        "threshold": number(s.threshold),
        "stationarity": number(s.stationarity),
        "pass": s.pass,
    })
}

fn init_name(k: InitKind) -> &'static str {
    match k {
        InitKind::GeometricMean => "geometric_mean",
        InitKind::ShiftedRiccati => "shifted_riccati",
        InitKind::ArithmeticMean => "arithmetic_mean",
        InitKind::ScaledIdentity => "scaled_identity",
        InitKind::Given => "given",
    }
}

fn domain_name(d: TimeDomain) -> &'static str {
    match d {
        TimeDomain::Continuous => "continuous",
        TimeDomain::Discrete => "discrete",
    }
}

fn write_trace(path: &Path, rows: &[IterationRecord]) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| io_failure(path, e))?;
    let mut text = String::from("iter,barrier,decrement,residual,alpha,wallclock_seconds\n");
    for r in rows {
        text.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.iter, r.barrier, r.decrement, r.residual, r.alpha, r.wallclock_seconds
        ));
    }
    f.write_all(text.as_bytes()).map_err(|e| io_failure(path, e))
}

fn center_value(doc: &ModelDocument, res: &CenterResult) -> CliResult<Value> {
    let mut v = json!({
        "converged": res.converged,
        "time_domain": domain_name(doc.model.domain()),
        "barrier": number(res.barrier_value),
        "iterations": res.iterations.len().saturating_sub(1),
        "init": init_name(res.init),
        "x_center": matrix_value(res.x_center.matrix()),
        "closed_loop_eigenvalues": res.closed_loop_eigs.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
        "spectrum": spectrum_value(&res.spectrum),
    });
    if doc.weight.is_none() {
        let s = stationarity_systems(&doc.model, &res.x_center)?;
        v["stationarity"] = json!({
            "f": number(s.f),
            "x": number(s.x),
            "p": number(s.p),
        });
    }
    Ok(v)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Center {
            input,
            solver,
            trace,
            out,
        } => {
            let doc = read_model(&input)?;
            let opts = options(&solver, &doc)?;
            let res = compute_analytic_center_with(&doc.model, doc.weight.as_ref(), &opts)?;
            if let Some(t) = &trace {
                write_trace(t, &res.iterations)?;
            }
            emit(out.as_deref(), &to_json_string(&center_value(&doc, &res)?))?;
            Ok(if res.converged { 0 } else { 4 })
        }
        Command::Riccati { input, out } => {
            let doc = read_model(&input)?;
            let pair = solve_extremal(&doc.model)?;
            let v = json!({
                "time_domain": domain_name(doc.model.domain()),
                "x_min": matrix_value(pair.x_min.matrix()),
                "x_max": matrix_value(pair.x_max.matrix()),
                "residual_min": number(riccati_residual(&doc.model, &pair.x_min)?.norm_fro()),
                "residual_max": number(riccati_residual(&doc.model, &pair.x_max)?.norm_fro()),
                "spectrum_min": pair.spectrum_min.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
                "spectrum_max": pair.spectrum_max.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
            });
            emit(out.as_deref(), &to_json_string(&v))?;
            Ok(0)
        }
        Command::Radius {
            input,
            solver,
            samples,
            margin,
            seed,
            out,
        } => {
            let doc = read_model(&input)?;
            let mut converged = true;
            let x = match &doc.x {
                Some(x) => x.clone(),
                None => {
                    let res = compute_analytic_center_with(&doc.model, None, &options(&solver, &doc)?)?;
                    converged = res.converged;
                    res.x_center
                }
            };
            let bound = x_passivity_bound(&doc.model, &x)?;
            let mut probes = Vec::new();
            for mg in margin {
                let r = probe_perturbations(&doc.model, &bound, samples, mg, seed)?;
                probes.push(json!({
                    "margin": number(mg),
                    "target_norm": number(r.target_norm),
                    "samples": r.samples,
                    "passed": r.passed,
                    "min_lambda": number(r.min_lambda),
                }));
            }
            let v = json!({
                "value": number(bound.value),
                "time_domain": domain_name(bound.domain),
                "approximate": bound.approximate,
                "x_used": matrix_value(bound.x_used.matrix()),
                "probes": probes,
            });
            emit(out.as_deref(), &to_json_string(&v))?;
            Ok(if converged { 0 } else { 4 })
        }
        Command::Transform { input, out } => {
            let doc = read_model(&input)?;
            let t = transform(&doc.model, doc.weight.as_ref())?;
            let res = ModelDocument {
                model: t.model,
                weight: Some(t.weight),
                x: doc.x,
            };
            let mut v = document_value(&res);
            v["det_ratio"] = number(t.det_ratio);
            emit(out.as_deref(), &to_json_string(&v))?;
            Ok(0)
        }
        Command::Gen {
            n,
            m,
            seed,
            domain,
            complex,
            out,
        } => {
            let d = match domain {
                DomainArg::Continuous => TimeDomain::Continuous,
                DomainArg::Discrete => TimeDomain::Discrete,
            };
            let model = if complex {
                random_passive_model_complex(n, m, seed, d)?
            } else {
                random_passive_model(n, m, seed, d)?
            };
            emit(out.as_deref(), &to_json_string(&document_value(&ModelDocument::new(model))))?;
            Ok(0)
        }
        Command::Check { input, out } => {
            let doc = read_model(&input)?;
            let x = doc.x.clone().ok_or_else(|| Failure {
                code: 2,
                kind: "parse",
                message: "check needs an X field in the model file".into(),
            })?;
            let spectrum = verify_center_spectrum(&doc.model, &x, doc.weight.as_ref())?;
            let mut v = Map::new();
            v.insert("spectrum".into(), spectrum_value(&spectrum));
            match stationarity_residual(&doc.model, &x, doc.weight.as_ref()) {
                Ok(r) => {
                    v.insert("stationarity_residual".into(), number(r));
                    v.insert("strictly_feasible".into(), Value::Bool(true));
                }
                Err(Error::Boundary { .. }) | Err(Error::NotPd { .. }) => {
                    v.insert("stationarity_residual".into(), Value::Null);
                    v.insert("strictly_feasible".into(), Value::Bool(false));
                }
                Err(e) => return Err(e.into()),
            }
            emit(out.as_deref(), &to_json_string(&Value::Object(v)))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let v = json!({ "error": f.kind, "message": f.message, "exit_code": f.code });
            eprintln!("{v}");
            ExitCode::from(f.code)
        }
    }
}
