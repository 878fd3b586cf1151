mod args;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use log::{debug, info};
use nqs_uat::constructors::BuildConfig;
use nqs_uat::fockspace::WavefunctionTable;
use nqs_uat::verify::{demo_necessity, random_target_for, run_construction, sweep, sweep_csv, SweepSpec};
use nqs_uat::{Error, Execution};

use args::{Cli, Command, ConstructArgs, DemoArgs, Format, Knobs, SweepArgs};

const EXIT_TOLERANCE: u8 = 2;
const EXIT_CONTRACT: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_USAGE: u8 = 5;
const THREADS_VAR: &str = "NQS_UAT_THREADS";

enum Failure {
    Usage(String),
    Tolerance(String),
    File(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Tolerance(_) => EXIT_TOLERANCE,
            Failure::File(_) => EXIT_IO,
            Failure::Lib(e) if e.is_io() => EXIT_IO,
            Failure::Lib(e) if e.is_contract() => EXIT_CONTRACT,
            Failure::Lib(Error::InvalidArgument(_) | Error::Capacity { .. }) => EXIT_USAGE,
            Failure::Lib(Error::Shape(_) | Error::LengthMismatch { .. }) => EXIT_IO,
            Failure::Lib(_) => EXIT_CONTRACT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Tolerance(m) | Failure::File(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn at_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        if e.is_io() {
            Failure::File(format!("{}: {e}", path.display()))
        } else {
            Failure::Lib(e)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::DemoNecessity(a) => cmd_demo(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size the worker pool: {e}")))?;
    debug!("worker threads: {n}");
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Outcome {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn build_config(knobs: &Knobs) -> Result<BuildConfig, Failure> {
    check_positive("theta", knobs.theta)?;
    check_positive("delta", knobs.delta)?;
    check_positive("omega-scale", knobs.omega_scale)?;
    if !(knobs.eps_zero > 0.0 && knobs.eps_zero < 1.0) {
        return Err(usage(format!("--eps-zero must lie in (0,1), got {}", knobs.eps_zero)));
    }
    if let Some(t) = knobs.tolerance {
        check_positive("tolerance", t)?;
    }
    let mut config = BuildConfig::new(knobs.builder);
    if let Some(a) = knobs.activation {
        config.activation = a;
    }
    config.theta = knobs.theta;
    config.electrons = knobs.electrons;
    config.general.delta = knobs.delta;
    config.general.omega_scale = knobs.omega_scale;
    config.general.eps_zero = knobs.eps_zero;
    Ok(config)
}

fn tolerance(knobs: &Knobs) -> f64 {
    knobs.tolerance.unwrap_or_else(|| knobs.builder.default_tolerance())
}

fn emit(path: Option<&Path>, body: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| at_path(p)(e.into())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(|e| Failure::Lib(e.into()))
        }
    }
}

fn cmd_construct(a: ConstructArgs) -> Outcome {
    let config = build_config(&a.knobs)?;
    let (psi, seed) = match (&a.input, a.random) {
        (Some(path), _) => {
            let psi = WavefunctionTable::read_json(path).map_err(at_path(path))?;
            if let Some(k) = a.k.filter(|&k| k != psi.orbitals()) {
                return Err(usage(format!("--K {k} does not match the {}-orbital input", psi.orbitals())));
            }
            (psi, None)
        }
        (None, true) => {
            let k = a.k.ok_or_else(|| usage("--random needs --K"))?;
            (random_target_for(config.builder, k, a.seed, config.electrons)?, Some(a.seed))
        }
        (None, false) => return Err(usage("give a target with --input or --random")),
    };
    let tol = tolerance(&a.knobs);
    let (built, mut report) = run_construction(&psi, &config, tol, seed, Execution::Parallel)?;
    if !a.knobs.timing {
        report.wall_ms = None;
    }
    if let Some(path) = &a.output {
        built.params.write_json(path).map_err(at_path(path))?;
        info!("parameters written to {}", path.display());
    }
    let body = match a.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    emit(a.report.as_deref(), &body)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "{} max-abs error {:e} exceeds tolerance {:e}",
            config.builder, report.max_abs, tol
        )))
    }
}

fn cmd_sweep(a: SweepArgs) -> Outcome {
    let config = build_config(&a.knobs)?;
    if a.grid.is_empty() {
        return Err(usage("--grid is empty"));
    }
    for &v in &a.grid {
        check_positive(config.builder.knob(), v)?;
    }
    let spec = SweepSpec { config, k: a.k, seeds: a.seeds.0, grid: a.grid, tolerance: tolerance(&a.knobs) };
    let start = Instant::now();
    let rows = sweep(&spec, Execution::Parallel)?;
    let mut body = String::new();
    if a.knobs.timing {
        body.push_str(&format!("# total_wall_ms={:.3}\n", start.elapsed().as_secs_f64() * 1e3));
    }
    body.push_str(&sweep_csv(&rows, a.knobs.timing)?);
    emit(a.output.as_deref(), &body)
}

fn cmd_demo(a: DemoArgs) -> Outcome {
    check_positive("delta", a.delta)?;
    check_positive("tolerance", a.tolerance)?;
    if !a.g.is_finite() || a.g == 0.0 {
        return Err(usage("--g must be finite and nonzero"));
    }
    let demo = demo_necessity(a.k, a.g, a.delta, Execution::Parallel)?;
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&demo).map_err(|e| Failure::Lib(e.into()))? + "\n",
        Format::Csv => {
            let rows = [
                ("K", demo.k.to_string()),
                ("g", demo.g.to_string()),
                ("delta", demo.delta.to_string()),
                ("forbidden_activation", demo.forbidden_activation.to_string()),
                ("obstruction_residual", demo.obstruction.residual.to_string()),
                ("forbidden_top_residual", demo.forbidden_top_residual.to_string()),
                ("forbidden_max_abs", demo.forbidden_error.max_abs.to_string()),
                ("cos_max_abs", demo.cos_error.max_abs.to_string()),
                ("cos_neurons", demo.cos_neurons.to_string()),
            ];
            let mut s = String::from("quantity,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    };
    emit(a.output.as_deref(), &body)?;
    let gap = (demo.forbidden_top_residual - a.g.abs()).abs();
    if gap > 1e-12 {
        return Err(Failure::Tolerance(format!("top residual differs from |g| by {gap:e}")));
    }
    if demo.cos_error.max_abs > a.tolerance {
        return Err(Failure::Tolerance(format!(
            "cos construction error {:e} exceeds {:e}",
            demo.cos_error.max_abs, a.tolerance
        )));
    }
    Ok(())
}

