//! Error measurement against re-tabulated ansätze, seeded random targets,
//! convergence sweeps and the top-mode necessity demonstration.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ansatz::{tabulate, Activation, AnsatzParams, NpsParams};
use crate::constructors::{
    build_nps_general, construct, necessity_residual, top_mode_target, BuildConfig, BuilderKind, Construction,
    ConstructionReport, GeneralNpsOptions, NecessityResidual,
};
use crate::error::{Error, Result};
use crate::exec::{try_map_range, Execution};
use crate::fockspace::{check_orbitals, dimension, OccupationVector, SpinConvention, WavefunctionTable};
use crate::fourier::{wht_forward, FourierTable};

/// Largest |amplitude| of the targets handed to the saturating NPS builder.
pub const SATURATING_TARGET_PEAK: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub max_abs: f64,
    pub l2: f64,
    /// ⟨a,b⟩/(‖a‖‖b‖); 0 when either table vanishes.
    pub overlap: f64,
    pub worst_index: usize,
}

pub fn compare(a: &WavefunctionTable, b: &WavefunctionTable) -> Result<ErrorSummary> {
    if a.orbitals() != b.orbitals() {
        return Err(Error::LengthMismatch { expected: a.orbitals(), found: b.orbitals() });
    }
    let mut max_abs = 0.0;
    let mut worst_index = 0;
    let mut sq = 0.0;
    let mut dot = 0.0;
    for (i, (x, y)) in a.amplitudes().iter().zip(b.amplitudes()).enumerate() {
        let d = (x - y).abs();
        if d > max_abs {
            max_abs = d;
            worst_index = i;
        }
        sq += d * d;
        dot += x * y;
    }
    let norms = a.norm() * b.norm();
    let overlap = if norms > 0.0 { (dot / norms).clamp(-1.0, 1.0) } else { 0.0 };
    Ok(ErrorSummary { max_abs, l2: sq.sqrt(), overlap, worst_index })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub summary: ErrorSummary,
}

/// ψ with every amplitude outside the N-electron sector set to zero.
pub fn sector_projection(psi: &WavefunctionTable, electrons: usize) -> WavefunctionTable {
    WavefunctionTable::from_fn(psi.orbitals(), |n| if n.electron_count() == electrons { psi.get(n.index()) } else { 0.0 })
        .expect("same shape as the input")
}

/// Re-tabulates `params` and compares against ψ (its sector projection for
/// backflow states). Passes iff the max-abs error is within `tolerance`.
pub fn check_construction(psi: &WavefunctionTable, params: &AnsatzParams, tolerance: f64, exec: Execution) -> Result<CheckOutcome> {
    let table = tabulate(params, exec)?;
    let summary = match params {
        AnsatzParams::Nnbf(p) => compare(&table, &sector_projection(psi, p.electrons))?,
        _ => compare(&table, psi)?,
    };
    Ok(CheckOutcome { passed: summary.max_abs <= tolerance, summary })
}

/// Fourier coefficients of ln ψ₊ - ln Θ for an NPS positive on every
/// configuration.
pub fn fourier_residual(params: &NpsParams, psi_plus: &WavefunctionTable) -> Result<FourierTable> {
    let k = psi_plus.orbitals();
    if params.k != k {
        return Err(Error::LengthMismatch { expected: k, found: params.k });
    }
    let mut diff = Vec::with_capacity(dimension(k));
    for i in 0..dimension(k) {
        let n = OccupationVector::new(k, i)?;
        if let Some(f) = params.factors(&n)?.into_iter().find(|f| !(*f > 0.0)) {
            return Err(Error::Domain(format!("factor {f} at index {i} is not positive")));
        }
        let a = psi_plus.get(i);
        if !(a > 0.0) {
            return Err(Error::Domain(format!("target amplitude {a} at index {i} is not positive")));
        }
        diff.push(a.ln() - params.eval_log(&n)?.log_magnitude);
    }
    Ok(wht_forward(&WavefunctionTable::new(k, diff)?, SpinConvention::Appendix))
}

fn normal_draws(k: usize, seed: u64) -> Result<Vec<f64>> {
    check_orbitals(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..dimension(k)).map(|_| StandardNormal.sample(&mut rng)).collect())
}

/// Independent standard-normal amplitudes, normalized.
pub fn random_target(k: usize, seed: u64) -> Result<WavefunctionTable> {
    WavefunctionTable::new(k, normal_draws(k, seed)?)?.normalized()
}

/// Random normalized amplitudes on the N-electron sector, zero elsewhere.
pub fn random_sector_target(k: usize, electrons: usize, seed: u64) -> Result<WavefunctionTable> {
    let draws = normal_draws(k, seed)?;
    WavefunctionTable::from_fn(k, |n| if n.electron_count() == electrons { draws[n.index()] } else { 0.0 })?.normalized()
}

/// ψ rescaled so that ‖ψ‖∞ = peak.
pub fn scaled_to_max_abs(psi: &WavefunctionTable, peak: f64) -> Result<WavefunctionTable> {
    let m = psi.max_abs();
    if m == 0.0 {
        return Err(Error::InvalidArgument("cannot rescale an all-zero table".into()));
    }
    Ok(psi.scaled(peak / m))
}

/// Default electron count for random backflow targets.
pub fn default_electrons(k: usize) -> usize {
    (k / 2).max(1)
}

/// The random target each builder is exercised on: normalized, restricted
/// to a sector for backflow, and peak-scaled for the saturating NPS.
pub fn random_target_for(builder: BuilderKind, k: usize, seed: u64, electrons: Option<usize>) -> Result<WavefunctionTable> {
    match builder {
        BuilderKind::Nnbf => random_sector_target(k, electrons.unwrap_or_else(|| default_electrons(k)), seed),
        BuilderKind::NpsSat => scaled_to_max_abs(&random_target(k, seed)?, SATURATING_TARGET_PEAK),
        BuilderKind::Fnn | BuilderKind::NpsGeneral => random_target(k, seed),
    }
}

/// Builds, re-tabulates and summarizes one construction.
pub fn run_construction(
    psi: &WavefunctionTable,
    config: &BuildConfig,
    tolerance: f64,
    seed: Option<u64>,
    exec: Execution,
) -> Result<(Construction, ConstructionReport)> {
    let start = Instant::now();
    let built = construct(psi, config)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let outcome = check_construction(psi, &built.params, tolerance, exec)?;
    let hidden_units = match &built.params {
        AnsatzParams::Nps(p) => p.hidden(),
        AnsatzParams::Fnn(p) => p.hidden(),
        AnsatzParams::Nnbf(p) => p.biases.len(),
        AnsatzParams::Rbm(p) => p.hidden_biases.len(),
        AnsatzParams::Cps(p) => p.correlators.len(),
    };
    let report = ConstructionReport {
        builder: config.builder,
        activation: config.activation,
        k: psi.orbitals(),
        seed,
        knob: config.builder.knob().to_string(),
        knob_value: config.knob_value(),
        tolerance,
        max_abs: outcome.summary.max_abs,
        l2: outcome.summary.l2,
        overlap: outcome.summary.overlap,
        worst_index: outcome.summary.worst_index,
        passed: outcome.passed,
        hidden_units,
        parameter_count: built.params.parameter_count(),
        tiers: built.tiers().to_vec(),
        wall_ms: Some(elapsed),
    };
    Ok((built, report))
}

/// A builder run across random seeds and a grid of knob values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub config: BuildConfig,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub grid: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub builder: BuilderKind,
    pub knob: f64,
    pub max_abs: f64,
    pub l2: f64,
    pub overlap: f64,
    pub wall_ms: Option<f64>,
}

/// Runs every (seed, knob) pair; rows come back sorted by seed, then by
/// position in the grid.
pub fn sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() || spec.seeds.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one seed and one knob value".into()));
    }
    let mut seeds = spec.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let per_seed = spec.grid.len();
    try_map_range(exec, seeds.len() * per_seed, |job| {
        let seed = seeds[job / per_seed];
        let knob = spec.grid[job % per_seed];
        let psi = random_target_for(spec.config.builder, spec.k, seed, spec.config.electrons)?;
        let mut config = spec.config.clone();
        config.set_knob(knob);
        let (_, report) = run_construction(&psi, &config, spec.tolerance, Some(seed), Execution::Sequential)?;
        Ok(SweepRow {
            seed,
            k: spec.k,
            builder: spec.config.builder,
            knob,
            max_abs: report.max_abs,
            l2: report.l2,
            overlap: report.overlap,
            wall_ms: report.wall_ms,
        })
    })
}

/// CSV with columns seed, K, builder, knob, max_abs, l2, overlap, wall_ms.
/// Wall times are written only when `timing` is set so that reruns give
/// identical bytes.
pub fn sweep_csv(rows: &[SweepRow], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let mut r = r.clone();
        if !timing {
            r.wall_ms = None;
        }
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["seed", "K", "builder", "knob", "max_abs", "l2", "overlap", "wall_ms"])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Side-by-side runs on ψ₊ ∝ exp(g z₁⋯z_K): an exp-polynomial activation
/// of degree K-1 and cos.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityDemo {
    #[serde(rename = "K")]
    pub k: usize,
    pub g: f64,
    pub delta: f64,
    pub forbidden_activation: Activation,
    pub obstruction: NecessityResidual,
    /// |top coefficient| of ln ψ₊ - ln Θ after the best-effort build.
    pub forbidden_top_residual: f64,
    pub forbidden_error: ErrorSummary,
    pub cos_error: ErrorSummary,
    pub cos_neurons: usize,
}

pub fn demo_necessity(k: usize, g: f64, delta: f64, exec: Execution) -> Result<NecessityDemo> {
    let psi = top_mode_target(k, g)?;
    let forbidden = Activation::ExpPoly { degree: (k - 1) as u32 };
    let obstruction = necessity_residual(forbidden, &psi)?;
    let opts = GeneralNpsOptions { best_effort: true, ..GeneralNpsOptions::with_delta(delta) };
    let best = build_nps_general(&psi, forbidden, &opts)?;
    let residual = fourier_residual(&best.positive_part, &best.positive_target)?;
    let forbidden_error = compare(&tabulate(&best.params, exec)?, &psi)?;
    let cos = build_nps_general(&psi, Activation::Cos, &GeneralNpsOptions::with_delta(delta))?;
    let cos_error = compare(&tabulate(&cos.params, exec)?, &psi)?;
    Ok(NecessityDemo {
        k,
        g,
        delta,
        forbidden_activation: forbidden,
        obstruction,
        forbidden_top_residual: residual.get(dimension(k) - 1).abs(),
        forbidden_error,
        cos_error,
        cos_neurons: cos.params.hidden(),
    })
}
