//! Experiment configuration (TOML, schema version 1).
//!
//! Every section has defaults, so a minimal file only needs
//! `schema_version` and `experiment`. Unknown keys are rejected. Angles are
//! radians, given either as numbers or as strings such as `"pi/4"` or
//! `"3*pi/8"`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::Path;

use ecps::linalg::{ComplexMatrix, C64};
use ecps::model::{self, EnvSpec, ModelParams};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Compare,
    ChoiScan,
    SteadyState,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Compare => "compare",
            ExperimentKind::ChoiScan => "choi-scan",
            ExperimentKind::SteadyState => "steady-state",
        })
    }
}

/// Angle in radians; accepts `0.5`, `"pi/4"`, `"3*pi/8"`, `"-pi"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl Angle {
    pub fn parse(s: &str) -> Option<f64> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.to_ascii_lowercase();
        if !s.contains("pi") {
            return s.parse().ok();
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
            None => (s.clone(), 1.0),
        };
        let factor = match num.as_str() {
            "pi" => 1.0,
            "-pi" => -1.0,
            other => other.strip_suffix("*pi")?.parse::<f64>().ok()?,
        };
        (den != 0.0).then(|| factor * PI / den)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Angle(x)),
            Raw::Int(x) => Ok(Angle(x as f64)),
            Raw::Text(s) => Angle::parse(&s)
                .map(Angle)
                .ok_or_else(|| serde::de::Error::custom(format!("cannot parse angle {s:?}"))),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n_levels: usize,
    pub delta_eps: f64,
    pub alpha: f64,
    pub xi: f64,
    pub seed: u64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            n_levels: 60,
            delta_eps: 0.5,
            alpha: 5e-3,
            xi: 0.0,
            seed: 1,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            n_levels: self.n_levels,
            delta_eps: self.delta_eps,
            alpha: self.alpha,
            xi: self.xi,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `|ψ⟩⟨ψ|` from amplitudes on `|0⟩, |1⟩`, normalized on load.
    Pure {
        amplitudes: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes_im: Option<[f64; 2]>,
    },
    /// `diag(p, 1 − p)`.
    Diagonal { p: f64 },
    /// Explicit 2×2 matrix.
    Matrix {
        re: [[f64; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<[[f64; 2]; 2]>,
    },
    /// `½[[1, a], [a*, 1]]`.
    Coherent {
        a: f64,
        #[serde(default)]
        a_im: f64,
    },
}

impl SystemSpec {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            SystemSpec::Pure { amplitudes, amplitudes_im } => {
                let im = amplitudes_im.unwrap_or([0.0; 2]);
                let a0 = C64::new(amplitudes[0], im[0]);
                let a1 = C64::new(amplitudes[1], im[1]);
                let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
                if norm == 0.0 {
                    return ComplexMatrix::zeros(2, 2);
                }
                model::pure_state(a0 / norm, a1 / norm)
            }
            SystemSpec::Diagonal { p } => model::diagonal_state(*p),
            SystemSpec::Matrix { re, im } => {
                let im = im.unwrap_or([[0.0; 2]; 2]);
                ComplexMatrix::from_fn(2, 2, |i, j| C64::new(re[i][j], im[i][j]))
            }
            SystemSpec::Coherent { a, a_im } => {
                let c = C64::new(*a, *a_im) * 0.5;
                ComplexMatrix::from_vec(2, 2, vec![C64::new(0.5, 0.0), c, c.conj(), C64::new(0.5, 0.0)])
                    .expect("2x2")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    /// `Π^i_θ / N`; give exactly one of `theta` or `sin_theta`.
    Branch {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Angle>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sin_theta: Option<f64>,
        #[serde(default = "default_branch")]
        branch: usize,
    },
    MaximallyMixed,
    Plus,
}

fn default_branch() -> usize {
    1
}

impl EnvironmentSpec {
    pub fn to_env(&self) -> EnvSpec {
        match self {
            EnvironmentSpec::Branch { theta, sin_theta, branch } => {
                let theta = match (theta, sin_theta) {
                    (Some(t), _) => t.0,
                    (None, Some(s)) => s.asin(),
                    (None, None) => 0.0,
                };
                EnvSpec::BranchProjector { theta, branch: *branch }
            }
            EnvironmentSpec::MaximallyMixed => EnvSpec::MaximallyMixed,
            EnvironmentSpec::Plus => EnvSpec::PlusProjector,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub system: SystemSpec,
    pub environment: EnvironmentSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectorSection {
    pub thetas: Vec<Angle>,
    /// Apply `P_θ` to the initial state before solving, dropping its
    /// irrelevant part. When false, an initial state with an irrelevant part
    /// is a numerical-precondition failure.
    pub project_initial: bool,
}

impl Default for ProjectorSection {
    fn default() -> Self {
        Self {
            thetas: vec![Angle(0.0), Angle(FRAC_PI_4)],
            project_initial: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub points: usize,
    /// End of the grid in units of the relaxation time `1/λ`.
    pub t_max_over_lambda: f64,
    /// Absolute end time; overrides `t_max_over_lambda` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            points: 400,
            t_max_over_lambda: 5.0,
            t_max: None,
        }
    }
}

impl TimeSection {
    /// Absolute end time. With `λ = 0` the relative setting is read as
    /// absolute time.
    pub fn resolve_t_max(&self, lambda: f64) -> f64 {
        match self.t_max {
            Some(t) => t,
            None if lambda > 0.0 => self.t_max_over_lambda / lambda,
            None => self.t_max_over_lambda,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub realizations: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { realizations: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub xi: Vec<f64>,
    pub theta_points: usize,
    pub theta_max: Angle,
    pub lambda: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            xi: vec![0.0, 0.5, 1.0],
            theta_points: 64,
            theta_max: Angle(FRAC_PI_4),
            lambda: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyStateSection {
    /// Weight of the `diag(p, 1 − p) ⊗ I/2N` component.
    pub p1: f64,
    pub p: f64,
    /// Off-diagonal `a` of the `½[[1, a], [a*, 1]] ⊗ Π⁺/N` component.
    pub coherence: f64,
    /// Evaluation time of the exact reference, in units of `1/λ`.
    pub t_over_lambda: f64,
    pub realizations: usize,
}

impl Default for SteadyStateSection {
    fn default() -> Self {
        Self {
            p1: 0.5,
            p: 0.9,
            coherence: 0.6,
            t_over_lambda: 50.0,
            realizations: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub theta: Angle,
    pub system: SystemSpec,
    pub environment: EnvironmentSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EcpsSection {
    pub components: Vec<ComponentSpec>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub projectors: ProjectorSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub steady_state: SteadyStateSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecps: Option<EcpsSection>,
}

fn config_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let value: toml::Value = toml::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            config_err(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        self.model
            .params()
            .validate()
            .map_err(|e| match e {
                ecps::Error::InvalidParameter { name, reason } => config_err(&format!("model.{name}"), reason),
                other => config_err("model", other.to_string()),
            })?;
        if self.time.points < 2 {
            return Err(config_err("time.points", "need at least 2 time points"));
        }
        if !(self.time.t_max_over_lambda.is_finite() && self.time.t_max_over_lambda > 0.0) {
            return Err(config_err("time.t_max_over_lambda", "must be positive"));
        }
        if let Some(t) = self.time.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(config_err("time.t_max", "must be positive"));
            }
        }
        if self.ensemble.realizations < 1 {
            return Err(config_err("ensemble.realizations", "must be at least 1"));
        }
        match self.experiment {
            ExperimentKind::Compare => self.validate_compare()?,
            ExperimentKind::ChoiScan => self.validate_scan()?,
            ExperimentKind::SteadyState => self.validate_steady_state()?,
        }
        Ok(())
    }

    fn validate_compare(&self) -> Result<(), CliError> {
        match (&self.initial, &self.ecps) {
            (None, None) => return Err(config_err("initial", "compare needs an [initial] section or an [ecps] decomposition")),
            (Some(_), Some(_)) => {
                return Err(config_err("ecps", "give either [initial] or [ecps]; with [ecps] the initial state is the weighted sum of its components"))
            }
            _ => {}
        }
        if self.projectors.thetas.is_empty() && self.ecps.is_none() {
            return Err(config_err("projectors.thetas", "at least one projector angle is required"));
        }
        if let Some(init) = &self.initial {
            validate_system(&init.system, "initial.system")?;
            validate_environment(&init.environment, "initial.environment")?;
        }
        if let Some(ecps) = &self.ecps {
            if ecps.components.is_empty() {
                return Err(config_err("ecps.components", "at least one component is required"));
            }
            let mut total = 0.0;
            for (i, c) in ecps.components.iter().enumerate() {
                let base = format!("ecps.components[{i}]");
                if !(c.weight.is_finite() && c.weight > 0.0) {
                    return Err(config_err(&format!("{base}.weight"), "must be positive"));
                }
                total += c.weight;
                validate_system(&c.system, &format!("{base}.system"))?;
                validate_environment(&c.environment, &format!("{base}.environment"))?;
            }
            if (total - 1.0).abs() > 1e-10 {
                return Err(config_err("ecps.components", format!("weights must sum to 1, got {total}")));
            }
        }
        Ok(())
    }

    fn validate_scan(&self) -> Result<(), CliError> {
        if self.scan.xi.is_empty() {
            return Err(config_err("scan.xi", "at least one xi value is required"));
        }
        for (i, xi) in self.scan.xi.iter().enumerate() {
            if !(0.0..=1.0).contains(xi) {
                return Err(config_err(&format!("scan.xi[{i}]"), format!("must lie in [0, 1], got {xi}")));
            }
        }
        if self.scan.theta_points < 1 {
            return Err(config_err("scan.theta_points", "must be at least 1"));
        }
        if !(self.scan.lambda.is_finite() && self.scan.lambda > 0.0) {
            return Err(config_err("scan.lambda", "must be positive"));
        }
        if !self.scan.theta_max.0.is_finite() {
            return Err(config_err("scan.theta_max", "must be finite"));
        }
        Ok(())
    }

    fn validate_steady_state(&self) -> Result<(), CliError> {
        let s = &self.steady_state;
        if !(0.0..=1.0).contains(&s.p1) {
            return Err(config_err("steady_state.p1", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&s.p) {
            return Err(config_err("steady_state.p", "must lie in [0, 1]"));
        }
        if !(s.coherence.abs() <= 1.0) {
            return Err(config_err("steady_state.coherence", "must satisfy |a| <= 1"));
        }
        if !(s.t_over_lambda.is_finite() && s.t_over_lambda > 0.0) {
            return Err(config_err("steady_state.t_over_lambda", "must be positive"));
        }
        if s.realizations < 1 {
            return Err(config_err("steady_state.realizations", "must be at least 1"));
        }
        if self.model.alpha == 0.0 {
            return Err(config_err("model.alpha", "steady-state needs a nonzero coupling"));
        }
        Ok(())
    }
}

fn validate_system(spec: &SystemSpec, path: &str) -> Result<(), CliError> {
    if let SystemSpec::Pure { amplitudes, amplitudes_im } = spec {
        let im = amplitudes_im.unwrap_or([0.0; 2]);
        if amplitudes.iter().chain(&im).all(|&a| a == 0.0) {
            return Err(config_err(&format!("{path}.amplitudes"), "amplitudes must not all vanish"));
        }
    }
    spec.matrix()
        .check_density(1e-10)
        .map_err(|e| config_err(path, e.to_string()))
}

fn validate_environment(spec: &EnvironmentSpec, path: &str) -> Result<(), CliError> {
    if let EnvironmentSpec::Branch { theta, sin_theta, branch } = spec {
        if theta.is_some() && sin_theta.is_some() {
            return Err(config_err(path, "give only one of `theta` and `sin_theta`"));
        }
        if let Some(s) = sin_theta {
            if !(-1.0..=1.0).contains(s) {
                return Err(config_err(&format!("{path}.sin_theta"), "must lie in [-1, 1]"));
            }
        }
        if !(1..=2).contains(branch) {
            return Err(config_err(&format!("{path}.branch"), "must be 1 or 2"));
        }
    }
    Ok(())
}
