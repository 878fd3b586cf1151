//! Builders that turn a target wavefunction into ansatz parameters.

mod fnn;
mod general;
mod necessity;
mod nnbf;
mod saturating;
mod sign;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fnn::{build_fnn_exact, indicator_layer};
pub use general::{build_nps_general, check_activation_conditions, GeneralNps, GeneralNpsOptions, TierRow, TierStatus};
pub use necessity::{necessity_residual, top_mode_target, NecessityResidual};
pub use nnbf::{build_nnbf_exact, infer_electrons};
pub use saturating::{
    build_nps_saturating, separating_margins, separating_vector, solve_preimage, PREIMAGE_BRACKET,
    PREIMAGE_TOLERANCE, SATURATING_PRESCALE,
};
pub use sign::{build_sign_factor, isolating_hyperplane, regularize_zeros, SignFactor};

use crate::ansatz::{Activation, AnsatzParams};
use crate::error::{Error, Result};
use crate::fockspace::WavefunctionTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BuilderKind {
    Fnn,
    Nnbf,
    NpsSat,
    NpsGeneral,
}

impl BuilderKind {
    pub const ALL: [BuilderKind; 4] = [BuilderKind::Fnn, BuilderKind::Nnbf, BuilderKind::NpsSat, BuilderKind::NpsGeneral];

    pub fn as_str(self) -> &'static str {
        match self {
            BuilderKind::Fnn => "fnn",
            BuilderKind::Nnbf => "nnbf",
            BuilderKind::NpsSat => "nps-sat",
            BuilderKind::NpsGeneral => "nps-general",
        }
    }

    pub fn default_activation(self) -> Activation {
        match self {
            BuilderKind::Fnn | BuilderKind::Nnbf => Activation::Sigmoid,
            BuilderKind::NpsSat => Activation::Tanh,
            BuilderKind::NpsGeneral => Activation::Cos,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            BuilderKind::Fnn => 1e-10,
            BuilderKind::Nnbf => 1e-8,
            BuilderKind::NpsSat => 1e-6,
            BuilderKind::NpsGeneral => 1e-2,
        }
    }

    /// Name of the convergence knob: θ for the saturating builders, δ for
    /// the general one.
    pub fn knob(self) -> &'static str {
        match self {
            BuilderKind::NpsGeneral => "delta",
            _ => "theta",
        }
    }
}

impl fmt::Display for BuilderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuilderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuilderKind::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown builder {s:?}; expected fnn, nnbf, nps-sat or nps-general")))
    }
}

impl TryFrom<String> for BuilderKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BuilderKind> for String {
    fn from(b: BuilderKind) -> Self {
        b.as_str().to_string()
    }
}

/// Everything a builder needs besides the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub builder: BuilderKind,
    pub activation: Activation,
    pub theta: f64,
    /// Electron count for the backflow builder; inferred from the target
    /// when absent.
    pub electrons: Option<usize>,
    pub general: GeneralNpsOptions,
}

impl BuildConfig {
    pub fn new(builder: BuilderKind) -> Self {
        Self {
            builder,
            activation: builder.default_activation(),
            theta: 40.0,
            electrons: None,
            general: GeneralNpsOptions::default(),
        }
    }

    pub fn knob_value(&self) -> f64 {
        match self.builder {
            BuilderKind::NpsGeneral => self.general.delta,
            _ => self.theta,
        }
    }

    /// Sets θ or δ, whichever this builder converges in.
    pub fn set_knob(&mut self, value: f64) {
        match self.builder {
            BuilderKind::NpsGeneral => self.general.delta = value,
            _ => self.theta = value,
        }
    }
}

/// Parameters from one builder run, with the tier trace when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct Construction {
    pub params: AnsatzParams,
    pub general: Option<GeneralNps>,
}

impl Construction {
    pub fn tiers(&self) -> &[TierRow] {
        self.general.as_ref().map_or(&[], |g| &g.tiers)
    }
}

pub fn construct(psi: &WavefunctionTable, config: &BuildConfig) -> Result<Construction> {
    let act = config.activation;
    let (params, general) = match config.builder {
        BuilderKind::Fnn => (AnsatzParams::Fnn(build_fnn_exact(psi, act, config.theta)?), None),
        BuilderKind::Nnbf => {
            let electrons = match config.electrons {
                Some(n) => n,
                None => infer_electrons(psi)?,
            };
            (AnsatzParams::Nnbf(build_nnbf_exact(psi, electrons, act, config.theta)?), None)
        }
        BuilderKind::NpsSat => (AnsatzParams::Nps(build_nps_saturating(psi, act, config.theta)?), None),
        BuilderKind::NpsGeneral => {
            let g = build_nps_general(psi, act, &config.general)?;
            (AnsatzParams::Nps(g.params.clone()), Some(g))
        }
    };
    Ok(Construction { params, general })
}

/// Outcome of one construction, with errors measured by re-tabulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub builder: BuilderKind,
    pub activation: Activation,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: Option<u64>,
    pub knob: String,
    pub knob_value: f64,
    pub tolerance: f64,
    pub max_abs: f64,
    pub l2: f64,
    pub overlap: f64,
    pub worst_index: usize,
    pub passed: bool,
    pub hidden_units: usize,
    pub parameter_count: usize,
    pub tiers: Vec<TierRow>,
    pub wall_ms: Option<f64>,
}

#[derive(Serialize)]
struct ReportRow<'a> {
    kind: &'a str,
    subset: &'a str,
    tier: Option<usize>,
    status: &'a str,
    target: Option<f64>,
    kappa_hat: Option<f64>,
    multiplicity: Option<u64>,
    residual: Option<f64>,
    max_abs: Option<f64>,
    l2: Option<f64>,
    overlap: Option<f64>,
}

impl ConstructionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per tier subset followed by one summary row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.tiers {
            let status = serde_json::to_value(t.status)?;
            w.serialize(ReportRow {
                kind: "tier",
                subset: &t.subset,
                tier: Some(t.tier),
                status: status.as_str().unwrap_or_default(),
                target: Some(t.target),
                kappa_hat: Some(t.kappa_hat),
                multiplicity: Some(t.multiplicity),
                residual: Some(t.residual),
                max_abs: None,
                l2: None,
                overlap: None,
            })?;
        }
        w.serialize(ReportRow {
            kind: "summary",
            subset: "",
            tier: None,
            status: if self.passed { "pass" } else { "fail" },
            target: None,
            kappa_hat: None,
            multiplicity: None,
            residual: None,
            max_abs: Some(self.max_abs),
            l2: Some(self.l2),
            overlap: Some(self.overlap),
        })?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_names_round_trip() {
        for b in BuilderKind::ALL {
            assert_eq!(b.as_str().parse::<BuilderKind>().unwrap(), b);
        }
        assert!("rbm".parse::<BuilderKind>().is_err());
    }

    #[test]
    fn knob_dispatch() {
        let mut c = BuildConfig::new(BuilderKind::NpsGeneral);
        c.set_knob(1e-3);
        assert_eq!(c.general.delta, 1e-3);
        assert_eq!(c.knob_value(), 1e-3);
        let mut c = BuildConfig::new(BuilderKind::Fnn);
        c.set_knob(80.0);
        assert_eq!(c.theta, 80.0);
    }

    #[test]
    fn nnbf_infers_sector() {
        let psi = WavefunctionTable::from_fn(3, |n| if n.electron_count() == 2 { 0.5 } else { 0.0 }).unwrap();
        let c = construct(&psi, &BuildConfig::new(BuilderKind::Nnbf)).unwrap();
        match c.params {
            AnsatzParams::Nnbf(p) => assert_eq!(p.electrons, 2),
            other => panic!("unexpected {}", other.kind()),
        }
    }

    #[test]
    fn csv_has_summary_row() {
        let report = ConstructionReport {
            builder: BuilderKind::Fnn,
            activation: Activation::Sigmoid,
            k: 2,
            seed: Some(1),
            knob: "theta".into(),
            knob_value: 40.0,
            tolerance: 1e-10,
            max_abs: 1e-13,
            l2: 2e-13,
            overlap: 1.0,
            worst_index: 0,
            passed: true,
            hidden_units: 4,
            parameter_count: 16,
            tiers: vec![],
            wall_ms: None,
        };
        let csv = report.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("kind,subset,tier"));
        assert!(lines[1].starts_with("summary,,,pass"));
        assert_eq!(ConstructionReport::from_json(&report.to_json().unwrap()).unwrap(), report);
    }
}
